#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "gestfuse/error.hpp"
#include "gestfuse/svm.hpp"
#include "support/tempdir.hpp"

using namespace gestfuse;

namespace {

using Rows = std::vector<std::vector<double>>;

// Gaussian blobs around well-separated 2-D centers, one per class.
void make_blobs(const std::vector<std::pair<double, double>>& centers, int per_class,
                double sigma, unsigned seed, Rows* X, std::vector<int>* labels) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (std::size_t c = 0; c < centers.size(); ++c)
    for (int i = 0; i < per_class; ++i) {
      X->push_back({centers[c].first + noise(rng), centers[c].second + noise(rng)});
      labels->push_back(static_cast<int>(c));
    }
}

double kkt_residual(const BinarySvmModel& model, const Rows& X, const std::vector<int>& y,
                    double C) {
  // Complementarity check on every training point: free SVs must sit on the
  // margin, points off the support must satisfy y f(x) >= 1 - tol, bound SVs
  // y f(x) <= 1 + tol.
  std::vector<double> alpha_y(X.size(), 0.0);
  for (std::size_t s = 0; s < model.support_vectors.size(); ++s)
    for (std::size_t i = 0; i < X.size(); ++i)
      if (model.support_vectors[s] == X[i] && alpha_y[i] == 0.0) {
        alpha_y[i] = model.dual_coefs[s];
        break;
      }
  double worst = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double margin = y[i] * model.decision(X[i]);
    const double a = std::abs(alpha_y[i]);
    if (a <= 0.0)
      worst = std::max(worst, 1.0 - margin);  // must classify with margin
    else if (a < C)
      worst = std::max(worst, std::abs(margin - 1.0));  // on the margin
    else
      worst = std::max(worst, margin - 1.0);  // inside or on the margin
  }
  return worst;
}

}  // namespace

TEST_SUITE("svm") {
  TEST_CASE("rbf kernel of a point with itself is 1") {
    const std::vector<double> x = {0.3, -2.5, 7.0};
    CHECK(kernel_eval({KernelKind::rbf, 0.7}, x, x) == doctest::Approx(1.0));
  }

  TEST_CASE("linear kernel [1,2]x[3,4] = 11") {
    CHECK(kernel_eval({KernelKind::linear, 0}, std::vector<double>{1, 2},
                      std::vector<double>{3, 4}) == doctest::Approx(11.0));
  }

  TEST_CASE("rbf closed form: gamma=0.5 at squared distance 2 gives 1/e") {
    const std::vector<double> x = {0.0, 0.0}, y = {1.0, 1.0};
    CHECK(kernel_eval({KernelKind::rbf, 0.5}, x, y) == doctest::Approx(std::exp(-1.0)));
  }

  TEST_CASE("kernels are symmetric and rbf values stay in (0,1]") {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> d(-5, 5);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<double> x(6), y(6);
      for (auto& v : x) v = d(rng);
      for (auto& v : y) v = d(rng);
      for (KernelSpec spec : {KernelSpec{KernelKind::linear, 0}, KernelSpec{KernelKind::rbf, 0.3}}) {
        CHECK(kernel_eval(spec, x, y) == doctest::Approx(kernel_eval(spec, y, x)));
      }
      const double r = kernel_eval({KernelKind::rbf, 0.3}, x, y);
      CHECK(r > 0.0);
      CHECK(r <= 1.0);
    }
  }

  TEST_CASE("mismatched kernel dimensions raise DimensionMismatch") {
    try {
      kernel_eval({KernelKind::linear, 0}, std::vector<double>{1, 2}, std::vector<double>{1});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::dimension_mismatch);
    }
  }

  TEST_CASE("symmetric pair puts the boundary at the origin") {
    const Rows X = {{-1.0}, {1.0}};
    const std::vector<int> y = {-1, 1};
    const BinarySvmModel model = train_binary(X, y, 10.0, {KernelKind::linear, 0});
    CHECK(std::abs(model.decision(std::vector<double>{0.0})) <= 1e-3);
    CHECK(model.decision(std::vector<double>{1.0}) > 0.0);
    CHECK(model.decision(std::vector<double>{-1.0}) < 0.0);
    CHECK(!model.support_vectors.empty());
  }

  TEST_CASE("separable 2-D blobs are classified perfectly with KKT held") {
    Rows X;
    std::vector<int> blob_labels;
    make_blobs({{-3, -3}, {3, 3}}, 100, 0.5, 5, &X, &blob_labels);
    std::vector<int> y;
    for (int l : blob_labels) y.push_back(l == 0 ? -1 : 1);
    for (double C : {0.1, 1.0, 10.0}) {
      const BinarySvmModel model = train_binary(X, y, C, {KernelKind::linear, 0});
      std::size_t hits = 0;
      for (std::size_t i = 0; i < X.size(); ++i)
        if ((model.decision(X[i]) > 0 ? 1 : -1) == y[i]) ++hits;
      CHECK(hits == X.size());
      CHECK(kkt_residual(model, X, y, C) <= 1.1e-3);
    }
  }

  TEST_CASE("dual coefficients are feasible and balanced") {
    Rows X;
    std::vector<int> blob_labels;
    make_blobs({{-1, 0}, {1, 0}}, 60, 0.8, 7, &X, &blob_labels);  // with overlap
    std::vector<int> y;
    for (int l : blob_labels) y.push_back(l == 0 ? -1 : 1);
    const double C = 2.0;
    const BinarySvmModel model = train_binary(X, y, C, {KernelKind::rbf, 0.5});
    double balance = 0.0;
    for (double coef : model.dual_coefs) {
      CHECK(std::abs(coef) <= C + 1e-9);
      balance += coef;  // coef = alpha_i y_i, so the sum is y'alpha
    }
    CHECK(std::abs(balance) <= 1e-6);
    CHECK(kkt_residual(model, X, y, C) <= 1.1e-3);
  }

  TEST_CASE("rbf solves XOR where linear cannot") {
    const Rows X = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
    const std::vector<int> y = {1, 1, -1, -1};
    const BinarySvmModel rbf = train_binary(X, y, 10.0, {KernelKind::rbf, 1.0});
    int rbf_hits = 0, linear_hits = 0;
    const BinarySvmModel lin = train_binary(X, y, 10.0, {KernelKind::linear, 0});
    for (std::size_t i = 0; i < X.size(); ++i) {
      if ((rbf.decision(X[i]) > 0 ? 1 : -1) == y[i]) ++rbf_hits;
      if ((lin.decision(X[i]) > 0 ? 1 : -1) == y[i]) ++linear_hits;
    }
    CHECK(rbf_hits == 4);
    CHECK(linear_hits <= 3);
  }

  TEST_CASE("single-class input raises SingleClassData") {
    const Rows X = {{0, 0}, {1, 1}};
    try {
      train_binary(X, {1, 1}, 1.0, {KernelKind::linear, 0});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::single_class_data);
    }
    try {
      train_multiclass(X, {3, 3}, 1.0, {KernelKind::linear, 0});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::single_class_data);
    }
  }

  TEST_CASE("non-finite features raise NonFiniteFeature") {
    const Rows X = {{0.0}, {std::numeric_limits<double>::quiet_NaN()}};
    try {
      train_binary(X, {-1, 1}, 1.0, {KernelKind::linear, 0});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::non_finite_feature);
    }
  }

  TEST_CASE("five separated blobs train to >=99% accuracy") {
    Rows X;
    std::vector<int> labels;
    make_blobs({{0, 8}, {8, 0}, {-8, 0}, {0, -8}, {8, 8}}, 60, 0.6, 11, &X, &labels);
    const MulticlassSvmModel model = train_multiclass(X, labels, 10.0, {KernelKind::rbf, 0});
    REQUIRE(model.classes.size() == 5);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      const auto [label, values] = predict(model, X[i]);
      CHECK(values.size() == 5);
      if (label == labels[i]) ++hits;
    }
    CHECK(static_cast<double>(hits) / X.size() >= 0.99);

    // Nearest-centroid oracle agrees on these well-separated clusters.
    const std::vector<std::pair<double, double>> centers = {
        {0, 8}, {8, 0}, {-8, 0}, {0, -8}, {8, 8}};
    for (std::size_t i = 0; i < X.size(); i += 17) {
      int nearest = 0;
      double best = 1e300;
      for (std::size_t c = 0; c < centers.size(); ++c) {
        const double dx = X[i][0] - centers[c].first, dy = X[i][1] - centers[c].second;
        if (dx * dx + dy * dy < best) {
          best = dx * dx + dy * dy;
          nearest = static_cast<int>(c);
        }
      }
      CHECK(predict(model, X[i]).first == nearest);
    }
  }

  TEST_CASE("rbf gamma defaults to one over the dimensionality") {
    Rows X;
    std::vector<int> labels;
    make_blobs({{-4, 0}, {4, 0}}, 20, 0.4, 13, &X, &labels);
    const MulticlassSvmModel model = train_multiclass(X, labels, 1.0, {KernelKind::rbf, 0});
    CHECK(model.kernel.gamma == doctest::Approx(0.5));
  }

  TEST_CASE("predict breaks ties toward the lowest class index") {
    // A model built by hand: two classes whose decision values coincide.
    MulticlassSvmModel model;
    model.dim = 1;
    model.kernel = {KernelKind::linear, 0};
    model.standardizer.mean = {0.0};
    model.standardizer.stddev = {1.0};
    model.class_labels = {0, 1, 2};
    BinarySvmModel flat;
    flat.kernel = model.kernel;
    flat.support_vectors = {{1.0}};
    flat.dual_coefs = {0.0};
    flat.bias = 0.2;
    BinarySvmModel losing = flat;
    losing.bias = -1.0;
    model.classes = {flat, flat, losing};
    CHECK(predict(model, std::vector<double>{0.0}).first == 0);
  }

  TEST_CASE("prediction is invariant under shared monotone shifts of decisions") {
    Rows X;
    std::vector<int> labels;
    make_blobs({{-3, 0}, {3, 0}, {0, 5}}, 30, 0.5, 17, &X, &labels);
    const MulticlassSvmModel model = train_multiclass(X, labels, 1.0, {KernelKind::linear, 0});
    for (std::size_t i = 0; i < X.size(); i += 7) {
      const auto [label, values] = predict(model, X[i]);
      auto shifted = values;
      for (double& v : shifted) v = 2.0 * v + 3.0;  // strictly increasing map
      CHECK(static_cast<std::size_t>(std::max_element(shifted.begin(), shifted.end()) -
                                     shifted.begin()) ==
            static_cast<std::size_t>(std::max_element(values.begin(), values.end()) -
                                     values.begin()));
      CHECK(label == model.class_labels[static_cast<std::size_t>(
                         std::max_element(values.begin(), values.end()) - values.begin())]);
    }
  }

  TEST_CASE("wrong prediction dimensionality raises DimensionMismatch") {
    Rows X;
    std::vector<int> labels;
    make_blobs({{-3, 0}, {3, 0}}, 10, 0.3, 19, &X, &labels);
    const MulticlassSvmModel model = train_multiclass(X, labels, 1.0, {KernelKind::linear, 0});
    CHECK_THROWS_AS(predict(model, std::vector<double>{1.0, 2.0, 3.0}), Error);
  }

  TEST_CASE("stratified folds partition the data with balanced classes") {
    std::vector<int> labels;
    for (int c = 0; c < 5; ++c)
      for (int i = 0; i < 20; ++i) labels.push_back(c);
    const auto folds = stratified_folds(labels, 5, 42);
    REQUIRE(folds.size() == 5);
    std::set<std::size_t> seen;
    for (const auto& fold : folds) {
      CHECK(fold.size() == 20);
      std::array<int, 5> per_class{};
      for (std::size_t idx : fold) {
        CHECK(seen.insert(idx).second);  // no index in two folds
        ++per_class[static_cast<std::size_t>(labels[idx])];
      }
      for (int count : per_class) CHECK(count == 4);
    }
    CHECK(seen.size() == labels.size());
    CHECK(stratified_folds(labels, 5, 42) == folds);  // seeded determinism
  }

  TEST_CASE("too few samples of a class raise InsufficientDataForFolds") {
    std::vector<int> labels = {0, 0, 0, 0, 0, 1, 1, 1};  // class 1 has 3 < 5
    try {
      stratified_folds(labels, 5, 1);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::insufficient_data_for_folds);
    }
  }

  TEST_CASE("singleton slack grid returns its only element") {
    Rows X;
    std::vector<int> labels;
    make_blobs({{-3, 0}, {3, 0}}, 10, 0.4, 23, &X, &labels);
    const double grid[] = {1.0};
    CHECK(select_slack(X, labels, {KernelKind::linear, 0}, grid) == doctest::Approx(1.0));
  }

  TEST_CASE("equal-accuracy grid resolves ties to the smallest C") {
    Rows X;
    std::vector<int> labels;
    make_blobs({{-5, 0}, {5, 0}}, 15, 0.3, 29, &X, &labels);  // trivially separable
    const double grid[] = {100.0, 0.01, 1.0};                 // unsorted on purpose
    CHECK(select_slack(X, labels, {KernelKind::linear, 0}, grid) == doctest::Approx(0.01));
  }

  TEST_CASE("slack selection is deterministic for a fixed seed") {
    Rows X;
    std::vector<int> labels;
    make_blobs({{-1.5, 0}, {1.5, 0}, {0, 2.5}}, 25, 0.9, 31, &X, &labels);
    const double a = select_slack(X, labels, {KernelKind::rbf, 0}, kDefaultSlackGrid, 5, 7);
    const double b = select_slack(X, labels, {KernelKind::rbf, 0}, kDefaultSlackGrid, 5, 7);
    CHECK(a == b);
  }

  TEST_CASE("models survive a JSON round trip bit-for-bit in behavior") {
    Rows X;
    std::vector<int> labels;
    make_blobs({{-2, -2}, {2, 2}, {-2, 2}}, 20, 0.5, 37, &X, &labels);
    const MulticlassSvmModel model = train_multiclass(X, labels, 5.0, {KernelKind::rbf, 0});
    testsupport::TempDir dir;
    const auto path = dir.path() / "model.json";
    save_svm(path, model);
    const MulticlassSvmModel back = load_svm(path);
    CHECK(back.dim == model.dim);
    CHECK(back.kernel.gamma == doctest::Approx(model.kernel.gamma));
    CHECK(back.class_labels == model.class_labels);
    for (std::size_t i = 0; i < X.size(); ++i) {
      const auto [la, va] = predict(model, X[i]);
      const auto [lb, vb] = predict(back, X[i]);
      CHECK(la == lb);
      for (std::size_t c = 0; c < va.size(); ++c) CHECK(vb[c] == doctest::Approx(va[c]));
    }
  }

  TEST_CASE("standardization makes prediction invariant to feature rescaling") {
    Rows X;
    std::vector<int> labels;
    make_blobs({{-2, 0}, {2, 0}}, 30, 0.5, 41, &X, &labels);
    Rows X_scaled = X;
    for (auto& row : X_scaled) {
      row[0] *= 1000.0;  // disparate units, as in concatenated modalities
      row[1] *= 0.001;
    }
    const MulticlassSvmModel a = train_multiclass(X, labels, 1.0, {KernelKind::rbf, 0});
    const MulticlassSvmModel b = train_multiclass(X_scaled, labels, 1.0, {KernelKind::rbf, 0});
    std::size_t agree = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      auto scaled = X[i];
      scaled[0] *= 1000.0;
      scaled[1] *= 0.001;
      if (predict(a, X[i]).first == predict(b, scaled).first) ++agree;
    }
    CHECK(agree == X.size());
  }
}
