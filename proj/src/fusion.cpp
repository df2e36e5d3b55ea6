#include "gestfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gestfuse/cnn_io.hpp"
#include "gestfuse/error.hpp"
#include "gestfuse/fgcn.hpp"

namespace gestfuse {

namespace {

using nlohmann::json;

constexpr int kFusionInputs = 2 * kGestureCount;  // two 5-value activity vectors

struct ModalityName {
  Modality modality;
  const char* name;
};

constexpr ModalityName kModalityNames[] = {
    {Modality::EMG, "EMG"},         {Modality::DVS, "DVS"},
    {Modality::DAV, "DAV"},         {Modality::FRM, "FRM"},
    {Modality::FUS_DVS, "FUS-DVS"}, {Modality::FUS_DAV, "FUS-DAV"},
    {Modality::FUS_FRM, "FUS-FRM"},
};

std::vector<double> softmax(std::vector<double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return z;
}

// The network's "output activity": its probabilities, or the logits feeding
// the final softmax when the model was configured that way.
std::vector<double> activities(const CnnModel& net, const Tensor& input, bool logits) {
  if (!logits) return net.forward(input);
  if (input.shape != net.input_shape())
    raise(Errc::shape_mismatch, "input does not match the network input shape");
  Tensor x = input;
  for (std::size_t i = 0; i + 1 < net.layers().size(); ++i)
    x = net.layers()[i]->forward(x, nullptr);
  return x.data;
}

void check_fusion_layer(const FusionModel& model) {
  if (model.weights.shape != std::vector<int>{kGestureCount, kFusionInputs} ||
      model.bias.shape != std::vector<int>{kGestureCount})
    raise(Errc::shape_mismatch, "fusion layer must be 5x10 weights with a 5-vector bias");
}

void check_paired(const PairedDataset& data) {
  if (data.size() == 0) raise(Errc::empty_dataset, "no paired samples");
  if (data.emg.size() != data.labels.size() || data.vision.size() != data.labels.size())
    raise(Errc::shape_mismatch, "paired dataset fields differ in length");
}

int argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

LayerSpec dense_spec(int in, int out) {
  LayerSpec s;
  s.kind = LayerSpec::Kind::dense;
  s.in_dim = in;
  s.out_dim = out;
  return s;
}

LayerSpec softmax_spec() {
  LayerSpec s;
  s.kind = LayerSpec::Kind::softmax;
  return s;
}

}  // namespace

const char* modality_name(Modality m) {
  for (const auto& entry : kModalityNames)
    if (entry.modality == m) return entry.name;
  raise(Errc::bad_config, "unknown modality");
}

Modality parse_modality(const std::string& name) {
  for (const auto& entry : kModalityNames)
    if (name == entry.name) return entry.modality;
  raise(Errc::bad_config, "unknown modality '" + name + "'");
}

bool is_fusion(Modality m) {
  return m == Modality::FUS_DVS || m == Modality::FUS_DAV || m == Modality::FUS_FRM;
}

Modality vision_source_of(Modality m) {
  switch (m) {
    case Modality::DVS:
    case Modality::FUS_DVS:
      return Modality::DVS;
    case Modality::DAV:
    case Modality::FUS_DAV:
      return Modality::DAV;
    case Modality::FRM:
    case Modality::FUS_FRM:
      return Modality::FRM;
    case Modality::EMG:
      break;
  }
  raise(Errc::bad_config, "EMG has no vision source");
}

const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::LinearSvm: return "SVM-linear";
    case ModelKind::RbfSvm: return "SVM-rbf";
    case ModelKind::Cnn: return "CNN";
  }
  raise(Errc::bad_config, "unknown model kind");
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "SVM-linear") return ModelKind::LinearSvm;
  if (name == "SVM-rbf") return ModelKind::RbfSvm;
  if (name == "CNN") return ModelKind::Cnn;
  raise(Errc::bad_config, "unknown model kind '" + name + "'");
}

std::vector<double> concat_features(const EmgFeatureVector& emg, const HogDescriptor& vision) {
  if (emg.n != vision.n)
    raise(Errc::window_index_mismatch,
          "feature vectors come from windows " + std::to_string(emg.n) + " and " +
              std::to_string(vision.n));
  std::vector<double> out;
  out.reserve(emg.values.size() + vision.values.size());
  out.insert(out.end(), emg.values.begin(), emg.values.end());
  out.insert(out.end(), vision.values.begin(), vision.values.end());
  return out;
}

std::vector<double> fusion_forward(const FusionModel& model, const Tensor& emg_input,
                                   const Tensor& vision_input) {
  check_fusion_layer(model);
  const auto a = activities(model.emg_cnn, emg_input, model.use_logits);
  const auto b = activities(model.vision_cnn, vision_input, model.use_logits);

  std::vector<double> z(kGestureCount);
  for (int o = 0; o < kGestureCount; ++o) {
    double acc = model.bias.data[static_cast<std::size_t>(o)];
    const double* row =
        model.weights.data.data() + static_cast<std::size_t>(o) * kFusionInputs;
    for (int j = 0; j < kGestureCount; ++j) {
      acc += row[j] * a[static_cast<std::size_t>(j)];
      acc += row[kGestureCount + j] * b[static_cast<std::size_t>(j)];
    }
    z[static_cast<std::size_t>(o)] = acc;
  }
  return softmax(std::move(z));
}

FusionModel train_two_step(const PairedDataset& data, const FusionTrainConfig& config,
                           std::uint64_t seed) {
  check_paired(data);

  FusionModel model;
  model.use_logits = config.use_logits;
  model.emg_cnn = make_emg_cnn(seed, "EMG");
  model.vision_cnn = make_vision_cnn(seed + 1, config.vision_modality);
  train_cnn(model.emg_cnn, data.emg, data.labels, config.cnn, seed + 2);
  train_cnn(model.vision_cnn, data.vision, data.labels, config.cnn, seed + 3);

  // Step 2: the networks are frozen, so their activities per sample are
  // constants; compute them once and train only the perceptron layer.
  std::vector<Tensor> head_inputs;
  head_inputs.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    Tensor t = Tensor::zeros({kFusionInputs});
    const auto a = activities(model.emg_cnn, data.emg[i], config.use_logits);
    const auto b = activities(model.vision_cnn, data.vision[i], config.use_logits);
    std::copy(a.begin(), a.end(), t.data.begin());
    std::copy(b.begin(), b.end(), t.data.begin() + kGestureCount);
    head_inputs.push_back(std::move(t));
  }

  const std::vector<LayerSpec> head_specs = {dense_spec(kFusionInputs, kGestureCount),
                                             softmax_spec()};
  CnnModel head = build_cnn({kFusionInputs}, head_specs, "FUS");
  head.init_params(seed + 4);
  TrainConfig head_config;
  head_config.epochs = config.fusion_epochs;
  head_config.batch_size = config.fusion_batch_size;
  head_config.rho = config.cnn.rho;
  head_config.epsilon = config.cnn.epsilon;
  train_cnn(head, head_inputs, data.labels, head_config, seed + 5);

  const auto head_params = head.parameters();
  model.weights = *head_params[0];
  model.bias = *head_params[1];
  return model;
}

void save_fusion(const std::filesystem::path& path, const FusionModel& model) {
  check_fusion_layer(model);
  json descriptor;
  descriptor["kind"] = "fusion";
  descriptor["use_logits"] = model.use_logits;
  descriptor["emg"] = json::parse(cnn_descriptor_json(model.emg_cnn));
  descriptor["vision"] = json::parse(cnn_descriptor_json(model.vision_cnn));

  std::vector<std::vector<double>> blobs;
  for (const Tensor* p : model.emg_cnn.parameters()) blobs.push_back(p->data);
  for (const Tensor* p : model.vision_cnn.parameters()) blobs.push_back(p->data);
  blobs.push_back(model.weights.data);
  blobs.push_back(model.bias.data);
  write_fgcn_file(path, descriptor.dump(), blobs);
}

FusionModel load_fusion(const std::filesystem::path& path) {
  const FgcnContent content = read_fgcn_file(path);
  try {
    const json descriptor = json::parse(content.descriptor);
    if (descriptor.at("kind").get<std::string>() != "fusion")
      raise(Errc::io_error, "container does not hold a fusion model");

    FusionModel model;
    model.use_logits = descriptor.at("use_logits").get<bool>();
    model.emg_cnn = cnn_from_descriptor_json(descriptor.at("emg").dump());
    model.vision_cnn = cnn_from_descriptor_json(descriptor.at("vision").dump());

    const auto emg_params = model.emg_cnn.parameters();
    const auto vision_params = model.vision_cnn.parameters();
    const std::size_t need = emg_params.size() + vision_params.size() + 2;
    if (content.blobs.size() != need)
      raise(Errc::io_error, "container holds " + std::to_string(content.blobs.size()) +
                                " blobs, fusion model needs " + std::to_string(need));

    std::size_t blob = 0;
    for (Tensor* p : emg_params) {
      if (content.blobs[blob].size() != p->data.size())
        raise(Errc::io_error, "parameter blob size mismatch");
      p->data = content.blobs[blob++];
    }
    for (Tensor* p : vision_params) {
      if (content.blobs[blob].size() != p->data.size())
        raise(Errc::io_error, "parameter blob size mismatch");
      p->data = content.blobs[blob++];
    }
    model.weights = Tensor::zeros({kGestureCount, kFusionInputs});
    model.bias = Tensor::zeros({kGestureCount});
    if (content.blobs[blob].size() != model.weights.data.size() ||
        content.blobs[blob + 1].size() != model.bias.data.size())
      raise(Errc::io_error, "fusion layer blob size mismatch");
    model.weights.data = content.blobs[blob];
    model.bias.data = content.blobs[blob + 1];
    return model;
  } catch (const json::exception& e) {
    raise(Errc::io_error, std::string("bad fusion descriptor: ") + e.what());
  }
}

PairedDataset make_complementary_synthetic(int n_per_class, double noise, std::uint64_t seed) {
  if (n_per_class < 20)
    raise(Errc::bad_config, "need at least 20 samples per class, got " +
                                std::to_string(n_per_class));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, noise > 0.0 ? noise : 1.0);
  auto jitter = [&]() { return noise > 0.0 ? dist(rng) : 0.0; };

  PairedDataset data;
  for (int k = 0; k < kGestureCount; ++k) {
    for (int r = 0; r < n_per_class; ++r) {
      const bool odd = (r % 2) == 1;
      // Classes 0 and 1 share one time-domain pattern on odd repetitions;
      // classes 3 and 4 share one image pattern on odd repetitions.
      const bool emg_ambiguous = odd && (k == 0 || k == 1);
      const bool vision_ambiguous = odd && (k == 3 || k == 4);

      Tensor e = Tensor::zeros({1, 16});
      for (double& v : e.data) v = jitter();
      e.data[static_cast<std::size_t>(emg_ambiguous ? 15 : 3 * k)] += 4.0;

      Tensor v = Tensor::zeros({1, kPatchSide, kPatchSide});
      for (double& px : v.data) px = jitter();
      const int base = vision_ambiguous ? -1 : 8 + 9 * k;
      const int by = vision_ambiguous ? 44 : base;
      const int bx = vision_ambiguous ? 8 : base;
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
          v.data[static_cast<std::size_t>(by + y) * kPatchSide + (bx + x)] += 1.0;

      data.emg.push_back(std::move(e));
      data.vision.push_back(std::move(v));
      data.labels.push_back(k);
      data.subjects.push_back(r % 5);
    }
  }
  return data;
}

std::vector<double> svm_feature_row(const Tensor& emg, const Tensor& vision,
                                    Modality modality) {
  if (modality == Modality::EMG) return emg.data;

  Patch patch;
  patch.side = vision.shape.back();
  patch.pixels = vision.data;
  HogDescriptor descriptor = hog(patch);
  if (!is_fusion(modality)) return std::move(descriptor.values);

  EmgFeatureVector emg_vec;
  emg_vec.values = emg.data;
  return concat_features(emg_vec, descriptor);
}

namespace {

// Per-sample feature rows for the maximum-margin models.
std::vector<std::vector<double>> svm_rows(const PairedDataset& data, Modality modality) {
  std::vector<std::vector<double>> rows;
  rows.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    rows.push_back(svm_feature_row(data.emg[i], data.vision[i], modality));
  return rows;
}

std::vector<std::vector<std::size_t>> fold_assignment(const PairedDataset& data,
                                                      const EvalConfig& config) {
  if (!config.per_subject) return stratified_folds(data.labels, config.folds, config.seed);

  if (data.subjects.size() != data.labels.size())
    raise(Errc::bad_config, "subject-wise folds need a subject id per sample");
  std::vector<int> distinct = data.subjects;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (static_cast<int>(distinct.size()) < config.folds)
    raise(Errc::insufficient_data_for_folds,
          std::to_string(distinct.size()) + " subjects cannot fill " +
              std::to_string(config.folds) + " folds");

  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(config.folds));
  for (std::size_t i = 0; i < data.subjects.size(); ++i) {
    const auto at = std::lower_bound(distinct.begin(), distinct.end(), data.subjects[i]) -
                    distinct.begin();
    folds[static_cast<std::size_t>(at) % folds.size()].push_back(i);
  }
  return folds;
}

double svm_fold_accuracy(const std::vector<std::vector<double>>& rows,
                         const std::vector<int>& labels, const std::vector<std::size_t>& test,
                         const std::vector<std::size_t>& train, double C, KernelSpec spec) {
  std::vector<std::vector<double>> x_train;
  std::vector<int> y_train;
  x_train.reserve(train.size());
  for (std::size_t i : train) {
    x_train.push_back(rows[i]);
    y_train.push_back(labels[i]);
  }
  const MulticlassSvmModel model = train_multiclass(x_train, y_train, C, spec);
  std::size_t correct = 0;
  for (std::size_t i : test)
    if (predict(model, rows[i]).first == labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

PairedDataset subset(const PairedDataset& data, const std::vector<std::size_t>& idx) {
  PairedDataset out;
  for (std::size_t i : idx) {
    out.emg.push_back(data.emg[i]);
    out.vision.push_back(data.vision[i]);
    out.labels.push_back(data.labels[i]);
    if (!data.subjects.empty()) out.subjects.push_back(data.subjects[i]);
  }
  return out;
}

double cnn_fold_accuracy(const PairedDataset& data, Modality modality,
                         const std::vector<std::size_t>& test,
                         const std::vector<std::size_t>& train, const EvalConfig& config,
                         std::uint64_t fold_seed) {
  const PairedDataset train_set = subset(data, train);
  std::size_t correct = 0;

  if (is_fusion(modality)) {
    FusionTrainConfig ftc;
    ftc.cnn = config.cnn;
    ftc.fusion_epochs = config.fusion_epochs;
    ftc.use_logits = config.use_logits;
    ftc.vision_modality = modality_name(vision_source_of(modality));
    const FusionModel model = train_two_step(train_set, ftc, fold_seed);
    for (std::size_t i : test)
      if (argmax(fusion_forward(model, data.emg[i], data.vision[i])) == data.labels[i])
        ++correct;
  } else {
    const bool emg = modality == Modality::EMG;
    CnnModel model = emg ? make_emg_cnn(fold_seed, "EMG")
                         : make_vision_cnn(fold_seed, modality_name(modality));
    const auto& inputs = emg ? train_set.emg : train_set.vision;
    train_cnn(model, inputs, train_set.labels, config.cnn, fold_seed + 1);
    for (std::size_t i : test) {
      const Tensor& x = emg ? data.emg[i] : data.vision[i];
      if (argmax(model.forward(x)) == data.labels[i]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace

EvalReport evaluate(const PairedDataset& data, Modality modality, ModelKind kind, int window_ms,
                    const EvalConfig& config) {
  check_paired(data);
  const auto folds = fold_assignment(data, config);

  // Feature rows are shared, read-only inputs for every fold.
  std::vector<std::vector<double>> rows;
  if (kind != ModelKind::Cnn) rows = svm_rows(data, modality);
  const KernelSpec spec{kind == ModelKind::RbfSvm ? KernelKind::rbf : KernelKind::linear, 0.0};

  std::vector<double> accuracies(folds.size(), 0.0);
  std::vector<std::exception_ptr> failures(folds.size());

  // Folds are independent; run them concurrently and merge by fold index.
  std::vector<std::thread> workers;
  for (std::size_t f = 0; f < folds.size(); ++f)
    workers.emplace_back([&, f] {
      try {
        std::vector<std::size_t> train;
        for (std::size_t g = 0; g < folds.size(); ++g)
          if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
        const std::uint64_t fold_seed = config.seed + 101 * (f + 1);
        accuracies[f] =
            kind == ModelKind::Cnn
                ? cnn_fold_accuracy(data, modality, folds[f], train, config, fold_seed)
                : svm_fold_accuracy(rows, data.labels, folds[f], train, config.svm_c, spec);
      } catch (...) {
        failures[f] = std::current_exception();
      }
    });
  for (auto& w : workers) w.join();
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);

  EvalReport report;
  report.modality = modality;
  report.model = kind;
  report.window_ms = window_ms;
  report.fold_accuracies = accuracies;
  double sum = 0.0;
  for (double a : accuracies) sum += a;
  report.mean_accuracy = sum / static_cast<double>(accuracies.size());
  double var = 0.0;
  for (double a : accuracies) var += (a - report.mean_accuracy) * (a - report.mean_accuracy);
  report.std_accuracy = std::sqrt(var / static_cast<double>(accuracies.size()));
  return report;
}

std::string format_report_table(std::span<const EvalReport> reports) {
  constexpr ModelKind kColumns[] = {ModelKind::LinearSvm, ModelKind::RbfSvm, ModelKind::Cnn};

  // Uniform window and fold count make a one-line context header.
  std::ostringstream out;
  if (!reports.empty()) {
    bool uniform = true;
    for (const auto& r : reports) uniform = uniform && r.window_ms == reports[0].window_ms;
    out << "Accuracy (%, mean +/- std over " << reports[0].fold_accuracies.size() << " folds";
    if (uniform) out << ", T = " << reports[0].window_ms << " ms";
    out << ")\n";
  }

  auto cell = [&](Modality m, ModelKind k) -> std::string {
    for (const auto& r : reports)
      if (r.modality == m && r.model == k) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.1f +/- %.1f", 100.0 * r.mean_accuracy,
                      100.0 * r.std_accuracy);
        return buf;
      }
    return "-";
  };

  out << std::left << std::setw(10) << "Modality";
  for (ModelKind k : kColumns) out << std::setw(16) << model_kind_name(k);
  out << '\n';
  for (const auto& entry : kModalityNames) {
    bool present = false;
    for (const auto& r : reports) present = present || r.modality == entry.modality;
    if (!present) continue;
    out << std::setw(10) << entry.name;
    for (ModelKind k : kColumns) out << std::setw(16) << cell(entry.modality, k);
    out << '\n';
  }
  return out.str();
}

std::string reports_to_json(std::span<const EvalReport> reports) {
  json arr = json::array();
  for (const auto& r : reports) {
    json j;
    j["modality"] = modality_name(r.modality);
    j["model"] = model_kind_name(r.model);
    j["window_ms"] = r.window_ms;
    j["fold_accuracies"] = r.fold_accuracies;
    j["mean_accuracy"] = r.mean_accuracy;
    j["std_accuracy"] = r.std_accuracy;
    arr.push_back(j);
  }
  return arr.dump(2);
}

Tensor emg_tensor(const SyncWindow& window) {
  const EmgFeatureVector features = emg_feature_vector(window);
  Tensor t;
  t.shape = {1, static_cast<int>(features.values.size())};
  t.data = features.values;
  return t;
}

Tensor vision_tensor(const SyncWindow& window, const SensorGeometry& geometry,
                     Modality vision_source) {
  Patch patch;
  switch (vision_source) {
    case Modality::DVS:
    case Modality::DAV:
      patch = window_event_patch(window, geometry);
      break;
    case Modality::FRM:
      patch = window_aps_patch(window, geometry);
      break;
    default:
      raise(Errc::bad_config, "vision source must be DVS, DAV, or FRM");
  }
  Tensor t;
  t.shape = {1, patch.side, patch.side};
  t.data = std::move(patch.pixels);
  return t;
}

void append_window(PairedDataset& data, const SyncWindow& window,
                   const SensorGeometry& geometry, Modality vision_source, int subject) {
  if (!window.label) return;
  data.emg.push_back(emg_tensor(window));
  data.vision.push_back(vision_tensor(window, geometry, vision_source));
  data.labels.push_back(static_cast<int>(*window.label));
  data.subjects.push_back(subject);
}

}  // namespace gestfuse
