#include "gestfuse/svm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <list>
#include <random>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "gestfuse/error.hpp"

namespace gestfuse {

namespace {

constexpr double kKktTolerance = 1e-3;
constexpr double kQuadFloor = 1e-12;             // guard for duplicate points
constexpr std::size_t kCacheBudget = 256 << 20;  // kernel cache, bytes

void check_matrix(const std::vector<std::vector<double>>& X) {
  if (X.empty()) raise(Errc::empty_dataset, "no training samples");
  const std::size_t d = X.front().size();
  if (d == 0) raise(Errc::dimension_mismatch, "zero-dimensional features");
  for (const auto& row : X) {
    if (row.size() != d)
      raise(Errc::dimension_mismatch, "feature rows of length " + std::to_string(row.size()) +
                                          " and " + std::to_string(d) + " in one set");
    for (double v : row)
      if (!std::isfinite(v)) raise(Errc::non_finite_feature, "non-finite feature value");
  }
}

KernelSpec resolve_gamma(KernelSpec spec, std::size_t d) {
  if (spec.kind == KernelKind::rbf && spec.gamma <= 0.0)
    spec.gamma = 1.0 / static_cast<double>(d);
  return spec;
}

// Lazily computed kernel rows with least-recently-used eviction. When the
// budget covers all n rows this degenerates to a lazy full Gram matrix.
class KernelCache {
 public:
  KernelCache(const std::vector<std::vector<double>>& X, KernelSpec spec)
      : X_(X), spec_(spec), capacity_(std::max<std::size_t>(
                                2, kCacheBudget / (X.size() * sizeof(double) + 1))) {
    diag_.resize(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) diag_[i] = kernel_eval(spec_, X[i], X[i]);
  }

  double diag(std::size_t i) const { return diag_[i]; }

  // Fills every row up front; only sensible when the budget covers them all.
  void precompute_all() {
    for (std::size_t i = 0; i < X_.size(); ++i) row(i);
  }

  // Thread-safe for concurrent readers only once every row is resident
  // (capacity covers n and precompute_all ran): hits then touch no state.
  const double* row(std::size_t i) {
    if (auto it = slots_.find(i); it != slots_.end()) {
      if (!holds_everything()) lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second.data();
    }
    if (slots_.size() >= capacity_) {
      slots_.erase(lru_.back().first);
      lru_.pop_back();
    }
    std::vector<double> values(X_.size());
    for (std::size_t j = 0; j < X_.size(); ++j) values[j] = kernel_eval(spec_, X_[i], X_[j]);
    lru_.emplace_front(i, std::move(values));
    slots_[i] = lru_.begin();
    return lru_.front().second.data();
  }

  bool holds_everything() const { return capacity_ >= X_.size(); }

 private:
  const std::vector<std::vector<double>>& X_;
  KernelSpec spec_;
  std::size_t capacity_;
  std::vector<double> diag_;
  std::list<std::pair<std::size_t, std::vector<double>>> lru_;
  std::unordered_map<std::size_t, std::list<std::pair<std::size_t, std::vector<double>>>::iterator>
      slots_;
};

struct SmoSolution {
  std::vector<double> alpha;
  double bias = 0.0;
};

// Two-variable SMO on the dual
//   min 0.5 a'Qa - e'a  s.t.  0 <= a_i <= C,  y'a = 0,  Q_ij = y_i y_j K_ij,
// selecting the maximal violating pair each round and stopping when the KKT
// gap m - M drops to the tolerance.
SmoSolution solve_smo(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                      double C, KernelCache& cache) {
  const std::size_t n = X.size();
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // d/da of the objective at a = 0

  // A "pass" worth of updates is n pair steps; cap at 10n passes as a safety
  // valve against degenerate cycling; typical runs stop on tolerance far
  // earlier.
  const std::size_t max_updates = std::max<std::size_t>(10 * n * n, 1000);
  double m = 0.0, M = 0.0;

  for (std::size_t step = 0;; ++step) {
    // Maximal violating pair: i maximizes -y_i grad_i over the set still
    // allowed to grow in the +y_i direction, j minimizes it over the set
    // allowed to shrink.
    std::size_t i = n, j = n;
    m = -std::numeric_limits<double>::infinity();
    M = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const bool up = y[t] > 0 ? alpha[t] < C : alpha[t] > 0;
      const bool low = y[t] > 0 ? alpha[t] > 0 : alpha[t] < C;
      const double v = -y[t] * grad[t];
      if (up && v > m) {
        m = v;
        i = t;
      }
      if (low && v < M) {
        M = v;
        j = t;
      }
    }
    if (i == n || j == n || m - M <= kKktTolerance) break;
    if (step >= max_updates) break;  // converged "enough"; bias still consistent

    const double* Ki = cache.row(i);
    const double Kij = Ki[j];
    double quad = cache.diag(i) + cache.diag(j) - 2.0 * Kij;
    if (quad <= 0.0) quad = kQuadFloor;

    const double old_ai = alpha[i], old_aj = alpha[j];
    if (y[i] != y[j]) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0 && alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = diff;
      } else if (diff <= 0 && alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = sum;
        }
        if (alpha[i] < 0) {
          alpha[i] = 0;
          alpha[j] = sum;
        }
      }
    }

    const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
    if (dai == 0.0 && daj == 0.0) break;  // numerically stuck, gap is within noise
    const double* Kj = cache.row(j);
    for (std::size_t t = 0; t < n; ++t)
      grad[t] += y[t] * (y[i] * Ki[t] * dai + y[j] * Kj[t] * daj);
  }

  SmoSolution sol;
  sol.alpha = std::move(alpha);
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t)
    if (sol.alpha[t] > 0.0 && sol.alpha[t] < C) {
      free_sum += -y[t] * grad[t];
      ++free_count;
    }
  sol.bias = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (m + M);
  return sol;
}

BinarySvmModel model_from_solution(const std::vector<std::vector<double>>& X,
                                   const std::vector<double>& y, const SmoSolution& sol,
                                   KernelSpec spec) {
  BinarySvmModel model;
  model.kernel = spec;
  model.bias = sol.bias;
  for (std::size_t t = 0; t < X.size(); ++t)
    if (sol.alpha[t] > 0.0) {
      model.support_vectors.push_back(X[t]);
      model.dual_coefs.push_back(sol.alpha[t] * y[t]);
    }
  return model;
}

BinarySvmModel train_one_vs_rest(const std::vector<std::vector<double>>& X,
                                 const std::vector<int>& labels, int positive, double C,
                                 KernelSpec spec, KernelCache& cache) {
  std::vector<double> y(labels.size());
  for (std::size_t t = 0; t < labels.size(); ++t) y[t] = labels[t] == positive ? 1.0 : -1.0;
  return model_from_solution(X, y, solve_smo(X, y, C, cache), spec);
}

double accuracy_on(const MulticlassSvmModel& model, const std::vector<std::vector<double>>& X,
                   const std::vector<int>& labels, const std::vector<std::size_t>& subset) {
  std::size_t hits = 0;
  for (std::size_t idx : subset)
    if (predict(model, X[idx]).first == labels[idx]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(subset.size());
}

}  // namespace

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    raise(Errc::dimension_mismatch, "kernel arguments of dimension " + std::to_string(x.size()) +
                                        " and " + std::to_string(y.size()));
  if (spec.kind == KernelKind::linear) {
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
    return dot;
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sq += d * d;
  }
  return std::exp(-spec.gamma * sq);
}

std::vector<double> Standardizer::transform(std::span<const double> x) const {
  if (x.size() != mean.size())
    raise(Errc::dimension_mismatch, "sample of dimension " + std::to_string(x.size()) +
                                        " against a " + std::to_string(mean.size()) +
                                        "-dimensional standardizer");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / stddev[i];
  return out;
}

Standardizer fit_standardizer(const std::vector<std::vector<double>>& rows) {
  check_matrix(rows);
  const std::size_t d = rows.front().size();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.stddev.assign(d, 0.0);
  for (const auto& row : rows)
    for (std::size_t i = 0; i < d; ++i) s.mean[i] += row[i];
  for (double& m : s.mean) m /= static_cast<double>(rows.size());
  for (const auto& row : rows)
    for (std::size_t i = 0; i < d; ++i) {
      const double dv = row[i] - s.mean[i];
      s.stddev[i] += dv * dv;
    }
  for (double& v : s.stddev) {
    v = std::sqrt(v / static_cast<double>(rows.size()));
    if (v == 0.0) v = 1.0;  // constant dimension passes through unscaled
  }
  return s;
}

double BinarySvmModel::decision(std::span<const double> x) const {
  double f = bias;
  for (std::size_t i = 0; i < support_vectors.size(); ++i)
    f += dual_coefs[i] * kernel_eval(kernel, support_vectors[i], x);
  return f;
}

BinarySvmModel train_binary(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                            double C, KernelSpec spec) {
  check_matrix(X);
  if (y.size() != X.size())
    raise(Errc::dimension_mismatch, "label count does not match sample count");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else raise(Errc::invalid_label, "binary labels must be -1 or +1, got " + std::to_string(v));
  }
  if (!pos || !neg) raise(Errc::single_class_data, "both classes required to train");
  spec = resolve_gamma(spec, X.front().size());
  std::vector<double> yd(y.begin(), y.end());
  KernelCache cache(X, spec);
  return model_from_solution(X, yd, solve_smo(X, yd, C, cache), spec);
}

MulticlassSvmModel train_multiclass(const std::vector<std::vector<double>>& X,
                                    const std::vector<int>& labels, double C, KernelSpec spec) {
  check_matrix(X);
  if (labels.size() != X.size())
    raise(Errc::dimension_mismatch, "label count does not match sample count");

  MulticlassSvmModel model;
  model.dim = X.front().size();
  model.standardizer = fit_standardizer(X);
  model.kernel = resolve_gamma(spec, model.dim);

  model.class_labels.assign(labels.begin(), labels.end());
  std::sort(model.class_labels.begin(), model.class_labels.end());
  model.class_labels.erase(std::unique(model.class_labels.begin(), model.class_labels.end()),
                           model.class_labels.end());
  if (model.class_labels.size() < 2)
    raise(Errc::single_class_data, "training set holds a single class");

  std::vector<std::vector<double>> Xs(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) Xs[i] = model.standardizer.transform(X[i]);

  KernelCache cache(Xs, model.kernel);
  model.classes.resize(model.class_labels.size());
  if (cache.holds_everything()) {
    // The Gram matrix is shared by every one-vs-rest problem; fill it once,
    // then the per-class solvers only read it.
    cache.precompute_all();
    std::vector<std::thread> workers;
    const std::size_t lanes =
        std::min<std::size_t>(model.class_labels.size(),
                              std::max(1u, std::thread::hardware_concurrency()));
    std::atomic<std::size_t> next{0};
    for (std::size_t lane = 0; lane < lanes; ++lane)
      workers.emplace_back([&] {
        for (std::size_t c; (c = next.fetch_add(1)) < model.class_labels.size();)
          model.classes[c] =
              train_one_vs_rest(Xs, labels, model.class_labels[c], C, model.kernel, cache);
      });
    for (auto& w : workers) w.join();
  } else {
    for (std::size_t c = 0; c < model.class_labels.size(); ++c)
      model.classes[c] =
          train_one_vs_rest(Xs, labels, model.class_labels[c], C, model.kernel, cache);
  }
  return model;
}

std::pair<int, std::vector<double>> predict(const MulticlassSvmModel& model,
                                            std::span<const double> x) {
  if (x.size() != model.dim)
    raise(Errc::dimension_mismatch, "sample of dimension " + std::to_string(x.size()) +
                                        " against a model expecting " +
                                        std::to_string(model.dim));
  const std::vector<double> xs = model.standardizer.transform(x);
  std::vector<double> values(model.classes.size());
  for (std::size_t c = 0; c < model.classes.size(); ++c) values[c] = model.classes[c].decision(xs);
  std::size_t best = 0;
  for (std::size_t c = 1; c < values.size(); ++c)
    if (values[c] > values[best]) best = c;
  return {model.class_labels[best], values};
}

std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& labels, int folds,
                                                       std::uint64_t seed) {
  if (folds < 2) raise(Errc::insufficient_data_for_folds, "need at least 2 folds");
  std::unordered_map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::vector<int> classes;
  for (const auto& [label, _] : by_class) classes.push_back(label);
  std::sort(classes.begin(), classes.end());

  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> assignment(folds);
  for (int label : classes) {
    auto& members = by_class[label];
    if (members.size() < static_cast<std::size_t>(folds))
      raise(Errc::insufficient_data_for_folds,
            "class " + std::to_string(label) + " has " + std::to_string(members.size()) +
                " samples for " + std::to_string(folds) + " folds");
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i = 0; i < members.size(); ++i)
      assignment[i % folds].push_back(members[i]);
  }
  for (auto& fold : assignment) std::sort(fold.begin(), fold.end());
  return assignment;
}

double select_slack(const std::vector<std::vector<double>>& X, const std::vector<int>& labels,
                    KernelSpec spec, std::span<const double> C_grid, int folds,
                    std::uint64_t seed) {
  if (C_grid.empty()) raise(Errc::bad_config, "empty slack grid");
  const auto fold_sets = stratified_folds(labels, folds, seed);

  std::vector<double> grid(C_grid.begin(), C_grid.end());
  std::sort(grid.begin(), grid.end());  // ties resolve to the smallest C

  double best_c = grid.front();
  double best_acc = -1.0;
  for (double C : grid) {
    double acc_sum = 0.0;
    for (int f = 0; f < folds; ++f) {
      std::vector<std::vector<double>> train_x;
      std::vector<int> train_y;
      for (int g = 0; g < folds; ++g) {
        if (g == f) continue;
        for (std::size_t idx : fold_sets[g]) {
          train_x.push_back(X[idx]);
          train_y.push_back(labels[idx]);
        }
      }
      const MulticlassSvmModel model = train_multiclass(train_x, train_y, C, spec);
      acc_sum += accuracy_on(model, X, labels, fold_sets[f]);
    }
    const double mean_acc = acc_sum / folds;
    if (mean_acc > best_acc) {
      best_acc = mean_acc;
      best_c = C;
    }
  }
  return best_c;
}

void save_svm(const std::filesystem::path& path, const MulticlassSvmModel& model) {
  nlohmann::json doc;
  doc["kernel"] = model.kernel.kind == KernelKind::linear ? "linear" : "rbf";
  doc["gamma"] = model.kernel.gamma;
  doc["d"] = model.dim;
  doc["standardization"] = {{"mean", model.standardizer.mean},
                            {"std", model.standardizer.stddev}};
  doc["classes"] = nlohmann::json::array();
  for (std::size_t c = 0; c < model.classes.size(); ++c) {
    const BinarySvmModel& bin = model.classes[c];
    doc["classes"].push_back({{"label", model.class_labels[c]},
                              {"support_vectors", bin.support_vectors},
                              {"dual_coefs", bin.dual_coefs},
                              {"bias", bin.bias}});
  }
  std::ofstream out(path);
  if (!out) raise(Errc::io_error, "cannot create " + path.string());
  out << doc.dump(2) << '\n';
}

MulticlassSvmModel load_svm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::missing_file, "cannot open model file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::io_error, "bad model JSON in " + path.string() + ": " + e.what());
  }
  MulticlassSvmModel model;
  try {
    model.kernel.kind =
        doc.at("kernel").get<std::string>() == "linear" ? KernelKind::linear : KernelKind::rbf;
    model.kernel.gamma = doc.at("gamma").get<double>();
    model.dim = doc.at("d").get<std::size_t>();
    model.standardizer.mean = doc.at("standardization").at("mean").get<std::vector<double>>();
    model.standardizer.stddev = doc.at("standardization").at("std").get<std::vector<double>>();
    for (const auto& entry : doc.at("classes")) {
      model.class_labels.push_back(entry.at("label").get<int>());
      BinarySvmModel bin;
      bin.kernel = model.kernel;
      bin.support_vectors = entry.at("support_vectors").get<std::vector<std::vector<double>>>();
      bin.dual_coefs = entry.at("dual_coefs").get<std::vector<double>>();
      bin.bias = entry.at("bias").get<double>();
      model.classes.push_back(std::move(bin));
    }
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::io_error, "bad model JSON in " + path.string() + ": " + e.what());
  }
  return model;
}

}  // namespace gestfuse
