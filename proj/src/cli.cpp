#include "gestfuse/cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gestfuse/aedat.hpp"
#include "gestfuse/cnn_io.hpp"
#include "gestfuse/emg_csv.hpp"
#include "gestfuse/emg_features.hpp"
#include "gestfuse/error.hpp"
#include "gestfuse/fgcn.hpp"
#include "gestfuse/fusion.hpp"
#include "gestfuse/pgm.hpp"
#include "gestfuse/pipeline.hpp"
#include "gestfuse/session.hpp"
#include "gestfuse/vision_features.hpp"

namespace gestfuse {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Argument-content problems that CLI11 cannot catch (bad enum value,
// wrong file extension, missing required combination). Exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

Modality modality_from_arg(const std::string& arg) {
  static const std::map<std::string, Modality> names = {
      {"emg", Modality::EMG},         {"dvs", Modality::DVS},
      {"dav", Modality::DAV},         {"frm", Modality::FRM},
      {"fus-dvs", Modality::FUS_DVS}, {"fus-dav", Modality::FUS_DAV},
      {"fus-frm", Modality::FUS_FRM}};
  const auto it = names.find(lowercase(arg));
  if (it == names.end())
    throw UsageError("unknown modality '" + arg +
                     "' (expected EMG, DVS, DAV, FRM, FUS-DVS, FUS-DAV or FUS-FRM)");
  return it->second;
}

ModelKind model_kind_from_arg(const std::string& arg) {
  static const std::map<std::string, ModelKind> names = {
      {"cnn", ModelKind::Cnn},           {"svm-linear", ModelKind::LinearSvm},
      {"linear", ModelKind::LinearSvm},  {"svm-rbf", ModelKind::RbfSvm},
      {"rbf", ModelKind::RbfSvm}};
  const auto it = names.find(lowercase(arg));
  if (it == names.end())
    throw UsageError("unknown model kind '" + arg +
                     "' (expected cnn, svm-linear or svm-rbf)");
  return it->second;
}

std::vector<std::string> split_list(const std::vector<std::string>& values) {
  std::vector<std::string> parts;
  for (const std::string& value : values) {
    std::stringstream stream(value);
    std::string part;
    while (std::getline(stream, part, ','))
      if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

// Defaults shared by every subcommand; a --config file overrides the
// built-ins, explicit flags override both.
struct Defaults {
  int window_ms = 200;
  std::string modality;
  std::string model_path;
  bool realtime = false;
  int queue_capacity = 8;
  bool keep_latest = true;
  std::int64_t processing_delay_us = 0;
  std::uint64_t seed = 0;
};

Defaults load_defaults(const std::vector<std::string>& args) {
  Defaults d;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return d;
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::missing_file, "config file '" + path + "' not found");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    raise(Errc::bad_config, std::string("config file is not valid JSON: ") + e.what());
  }
  try {
    if (j.contains("window_ms")) d.window_ms = j["window_ms"].get<int>();
    if (j.contains("modality")) d.modality = j["modality"].get<std::string>();
    if (j.contains("model_path")) d.model_path = j["model_path"].get<std::string>();
    if (j.contains("realtime")) d.realtime = j["realtime"].get<bool>();
    if (j.contains("queue_capacity")) {
      const int capacity = j["queue_capacity"].get<int>();
      if (capacity < 1) raise(Errc::bad_config, "queue_capacity must be at least 1");
      d.queue_capacity = capacity;
    }
    if (j.contains("keep_latest")) d.keep_latest = j["keep_latest"].get<bool>();
    if (j.contains("processing_delay_us"))
      d.processing_delay_us = j["processing_delay_us"].get<std::int64_t>();
    if (j.contains("seed")) d.seed = j["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    raise(Errc::bad_config, std::string("config field has the wrong type: ") + e.what());
  }
  return d;
}

// Loads every session manifest (*.json) under `dir`, slices labeled
// windows and collects the paired per-window samples.
PairedDataset load_dataset(const fs::path& dir, Modality modality, int window_ms) {
  if (!fs::is_directory(dir))
    raise(Errc::missing_file, "data directory '" + dir.string() + "' not found");
  std::vector<fs::path> manifests;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      manifests.push_back(entry.path());
  std::sort(manifests.begin(), manifests.end());
  if (manifests.empty())
    raise(Errc::empty_dataset, "no session manifests (*.json) in '" + dir.string() + "'");

  const Modality source = modality == Modality::EMG
                              ? Modality::DVS
                              : vision_source_of(modality);
  PairedDataset data;
  std::map<std::string, int> subject_ids;  // dense ids in manifest order
  for (const fs::path& manifest : manifests) {
    const Session session = load_session(manifest);
    const int subject =
        subject_ids.emplace(session.manifest.subject, static_cast<int>(subject_ids.size()))
            .first->second;
    for (const SyncWindow& window : window_slices(session, window_ms))
      append_window(data, window, session.geometry, source, subject);
  }
  if (data.size() == 0)
    raise(Errc::empty_dataset, "sessions under '" + dir.string() + "' hold no labeled windows");
  return data;
}

std::ostream& open_or(std::ofstream& file, const std::string& path, std::ostream& fallback) {
  if (path.empty()) return fallback;
  file.open(path, std::ios::binary);
  if (!file) raise(Errc::io_error, "cannot write '" + path + "'");
  return file;
}

// ---------------------------------------------------------------- convert

int run_convert(const std::string& model_path, const std::string& dataset_dir,
                const std::string& out_path, bool json_output, std::ostream& out) {
  if (model_path.empty() == dataset_dir.empty())
    throw UsageError("convert needs exactly one of --model or --dataset");
  if (out_path.empty()) throw UsageError("convert needs --out");

  if (!dataset_dir.empty()) {
    // Mapping a published archive onto the canonical session layout needs
    // the archive's directory structure, which varies by release; wire the
    // mapping in once a concrete archive is available.
    raise(Errc::bad_config,
          "dataset conversion is not wired to a concrete archive layout yet; "
          "write session manifests (see README) and point --data at them");
  }

  if (!fs::exists(model_path))
    raise(Errc::missing_model, "model file '" + model_path + "' not found");

  if (fs::path(model_path).extension() == ".json") {
    // JSON -> binary container.
    std::ifstream in(model_path, std::ios::binary);
    json j;
    try {
      in >> j;
      if (j.value("version", kFgcnVersion) != kFgcnVersion)
        raise(Errc::io_error, "unsupported container version in model JSON");
      const std::string descriptor = j.at("descriptor").dump();
      std::vector<std::vector<double>> blobs;
      for (const auto& blob : j.at("blobs"))
        blobs.push_back(blob.get<std::vector<double>>());
      write_fgcn_file(out_path, descriptor, blobs);
    } catch (const json::exception& e) {
      raise(Errc::io_error, std::string("model JSON is malformed: ") + e.what());
    }
  } else {
    // Binary container -> JSON.
    const FgcnContent content = read_fgcn_file(model_path);
    ordered_json j;
    j["version"] = content.version;
    try {
      j["descriptor"] = json::parse(content.descriptor);
    } catch (const json::exception& e) {
      raise(Errc::io_error, std::string("container descriptor is malformed: ") + e.what());
    }
    j["blobs"] = content.blobs;
    std::ofstream file(out_path, std::ios::binary);
    if (!file) raise(Errc::io_error, "cannot write '" + out_path + "'");
    file << j.dump(2) << '\n';
  }

  if (json_output) {
    ordered_json j;
    j["command"] = "convert";
    j["in"] = model_path;
    j["out"] = out_path;
    out << j.dump() << '\n';
  } else {
    out << "wrote " << out_path << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- inspect

void dump_window_images(const Session& session, const std::vector<SyncWindow>& windows,
                        const fs::path& dir, std::ostream& out, bool json_output) {
  fs::create_directories(dir);
  std::size_t frames = 0;
  std::size_t patches = 0;
  for (const SyncWindow& window : windows) {
    EventFrame frame = accumulate_event_frame(window, session.geometry);
    minmax_normalize(frame);
    char name[32];
    std::snprintf(name, sizeof(name), "w%05zu_frame.pgm", window.n);
    write_pgm(dir / name, static_cast<uint16_t>(frame.width),
              static_cast<uint16_t>(frame.height), frame.gray);
    ++frames;
    try {
      const Patch patch = window_event_patch(window, session.geometry);
      std::snprintf(name, sizeof(name), "w%05zu_patch.pgm", window.n);
      write_pgm(dir / name, static_cast<uint16_t>(patch.side),
                static_cast<uint16_t>(patch.side), patch.pixels);
      ++patches;
    } catch (const Error& e) {
      if (e.code() != Errc::empty_frame && e.code() != Errc::empty_window) throw;
    }
  }
  if (json_output) {
    ordered_json j;
    j["command"] = "inspect";
    j["windows"] = windows.size();
    j["frames"] = frames;
    j["patches"] = patches;
    j["out"] = dir.string();
    out << j.dump() << '\n';
  } else {
    out << "wrote " << frames << " event frames and " << patches << " patches for "
        << windows.size() << " windows to " << dir.string() << '\n';
  }
}

int run_inspect(const std::string& events_path, const std::string& emg_path,
                const std::string& session_path, const std::string& model_path,
                int window_ms, const std::string& out_path, bool json_output,
                std::ostream& out) {
  const int given = !events_path.empty() + !emg_path.empty() + !session_path.empty() +
                    !model_path.empty();
  if (given != 1)
    throw UsageError("inspect needs exactly one of --events, --emg, --session or --model");

  if (!model_path.empty()) {
    if (!fs::exists(model_path))
      raise(Errc::missing_model, "model file '" + model_path + "' not found");
    if (fs::path(model_path).extension() == ".json") {
      const MulticlassSvmModel model = load_svm(model_path);
      ordered_json j;
      j["kind"] = "svm";
      j["kernel"] = model.kernel.kind == KernelKind::rbf ? "rbf" : "linear";
      j["gamma"] = model.kernel.gamma;
      j["dim"] = model.dim;
      j["classes"] = model.class_labels;
      std::size_t sv = 0;
      for (const auto& binary : model.classes) sv += binary.support_vectors.size();
      j["support_vectors"] = sv;
      out << j.dump(2) << '\n';
    } else {
      const FgcnContent content = read_fgcn_file(model_path);
      ordered_json j;
      j["version"] = content.version;
      j["descriptor"] = json::parse(content.descriptor);
      std::vector<std::size_t> sizes;
      for (const auto& blob : content.blobs) sizes.push_back(blob.size());
      j["blob_sizes"] = sizes;
      out << j.dump(2) << '\n';
    }
    return 0;
  }

  if (!events_path.empty()) {
    const AedatData data = read_aedat(events_path);
    Session session;
    session.geometry = data.geometry;
    session.events = data.events;
    const auto windows = window_slices_unlabeled(session, window_ms);
    dump_window_images(session, windows,
                       out_path.empty() ? fs::path("frames") : fs::path(out_path), out,
                       json_output);
    return 0;
  }

  if (!emg_path.empty()) {
    std::ifstream in(emg_path, std::ios::binary);
    if (!in) raise(Errc::missing_file, "EMG file '" + emg_path + "' not found");
    Session session;
    session.geometry = geometry_for(SensorKind::dvs128);
    session.emg = parse_emg_csv(in);
    const auto windows = window_slices_unlabeled(session, window_ms);
    std::vector<EmgFeatureVector> features;
    for (const SyncWindow& window : windows) {
      try {
        features.push_back(emg_feature_vector(window));
      } catch (const Error& e) {
        if (e.code() != Errc::empty_window) throw;
      }
    }
    std::ofstream file;
    std::ostream& sink = open_or(file, out_path, out);
    write_feature_csv(sink, features);
    return 0;
  }

  const Session session = load_session(session_path);
  const auto windows = window_slices(session, window_ms);
  const fs::path dir = out_path.empty() ? fs::path("windows") : fs::path(out_path);
  dump_window_images(session, windows, dir, out, json_output);
  std::vector<EmgFeatureVector> features;
  for (const SyncWindow& window : windows) {
    try {
      features.push_back(emg_feature_vector(window));
    } catch (const Error& e) {
      if (e.code() != Errc::empty_window) throw;
    }
  }
  std::ofstream file(dir / "features.csv", std::ios::binary);
  write_feature_csv(file, features);
  return 0;
}

// ------------------------------------------------------------------ train

int run_train(const std::string& modality_arg, const std::string& kind_arg,
              const std::string& data_dir, int window_ms, const std::string& out_path,
              int epochs, int batch, int fusion_epochs, bool use_logits, double svm_c,
              std::uint64_t seed, bool json_output, std::ostream& out) {
  if (out_path.empty()) throw UsageError("train needs --out");
  const Modality modality = modality_from_arg(modality_arg);
  const ModelKind kind = model_kind_from_arg(kind_arg);
  const bool svm = kind != ModelKind::Cnn;
  const bool json_ext = fs::path(out_path).extension() == ".json";
  if (svm && !json_ext)
    throw UsageError("margin models are stored as JSON; use a .json output path");
  if (!svm && json_ext)
    throw UsageError("networks are stored in the binary container; avoid a .json output path");

  const PairedDataset data = load_dataset(data_dir, modality, window_ms);

  double final_loss = 0.0;
  if (!svm) {
    TrainConfig config;
    config.epochs = epochs;
    config.batch_size = batch;
    if (is_fusion(modality)) {
      FusionTrainConfig fusion_config;
      fusion_config.cnn = config;
      fusion_config.fusion_epochs = fusion_epochs;
      fusion_config.fusion_batch_size = batch;
      fusion_config.use_logits = use_logits;
      fusion_config.vision_modality = modality_name(vision_source_of(modality));
      const FusionModel model = train_two_step(data, fusion_config, seed);
      save_fusion(out_path, model);
    } else {
      CnnModel model = modality == Modality::EMG
                           ? make_emg_cnn(seed, "EMG")
                           : make_vision_cnn(seed, modality_name(modality));
      const auto& inputs = modality == Modality::EMG ? data.emg : data.vision;
      const TrainResult result = train_cnn(model, inputs, data.labels, config, seed + 1);
      if (!result.loss_history.empty()) final_loss = result.loss_history.back();
      save_cnn(out_path, model);
    }
  } else {
    std::vector<std::vector<double>> rows;
    rows.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
      rows.push_back(svm_feature_row(data.emg[i], data.vision[i], modality));
    KernelSpec spec;
    spec.kind = kind == ModelKind::RbfSvm ? KernelKind::rbf : KernelKind::linear;
    const MulticlassSvmModel model = train_multiclass(rows, data.labels, svm_c, spec);
    save_svm(out_path, model);
  }

  if (json_output) {
    ordered_json j;
    j["command"] = "train";
    j["modality"] = modality_name(modality);
    j["model"] = model_kind_name(kind);
    j["samples"] = data.size();
    if (!svm) j["final_loss"] = final_loss;
    j["out"] = out_path;
    out << j.dump() << '\n';
  } else {
    out << "trained " << model_kind_name(kind) << " (" << modality_name(modality) << ") on "
        << data.size() << " windows -> " << out_path << '\n';
  }
  return 0;
}

// ------------------------------------------------------------------- eval

int run_eval(const std::vector<std::string>& modality_args,
             const std::vector<std::string>& kind_args, const std::string& data_dir,
             int window_ms, int folds, bool per_subject, int epochs, int batch,
             int fusion_epochs, bool use_logits, double svm_c, std::uint64_t seed,
             const std::string& out_path, bool json_output, std::ostream& out) {
  const auto modality_names = split_list(modality_args);
  const auto kind_names = split_list(kind_args);
  if (modality_names.empty() || kind_names.empty())
    throw UsageError("eval needs --modality and --model (comma lists accepted)");

  std::vector<Modality> modalities;
  for (const std::string& name : modality_names) modalities.push_back(modality_from_arg(name));
  std::vector<ModelKind> kinds;
  for (const std::string& name : kind_names) kinds.push_back(model_kind_from_arg(name));

  EvalConfig config;
  config.folds = folds;
  config.seed = seed;
  config.svm_c = svm_c;
  config.cnn.epochs = epochs;
  config.cnn.batch_size = batch;
  config.fusion_epochs = fusion_epochs;
  config.use_logits = use_logits;
  config.per_subject = per_subject;

  std::vector<EvalReport> reports;
  for (const Modality modality : modalities) {
    const PairedDataset data = load_dataset(data_dir, modality, window_ms);
    for (const ModelKind kind : kinds)
      reports.push_back(evaluate(data, modality, kind, window_ms, config));
  }

  std::ofstream file;
  std::ostream& sink = open_or(file, out_path, out);
  if (json_output) sink << reports_to_json(reports) << '\n';
  else sink << format_report_table(reports);
  return 0;
}

// ----------------------------------------------------------------- replay

int run_replay_cmd(const std::string& session_path, const std::string& model_path,
                   const std::string& modality_arg, const PipelineConfig& base,
                   const std::string& out_path, bool json_output, std::ostream& out) {
  if (session_path.empty()) throw UsageError("replay needs --session");
  if (model_path.empty()) throw UsageError("replay needs --model (or model_path in --config)");
  if (modality_arg.empty())
    throw UsageError("replay needs --modality (or modality in --config)");

  PipelineConfig config = base;
  config.modality = modality_from_arg(modality_arg);
  config.model_path = model_path;

  const Session session = load_session(session_path);
  const Classifier classifier = Classifier::load(model_path, config.modality);
  const ReplayResult result = run_replay(session, classifier, config);

  std::ofstream file;
  std::ostream& sink = open_or(file, out_path, out);
  for (const ClassificationRecord& record : result.records)
    sink << record_json_line(record) << '\n';

  const ReplaySummary& s = result.summary;
  if (json_output) {
    out << summary_json(s) << '\n';
  } else {
    out << "windows " << s.total_windows << ", classified " << s.classified << ", dropped "
        << s.dropped << ", accuracy " << s.accuracy * 100.0 << "% (" << s.correct << "/"
        << s.labeled << "), latency mean " << s.mean_latency_us << " us, p95 "
        << s.p95_latency_us << " us\n";
  }
  return 0;
}

// ------------------------------------------------------------------ bench

int run_bench(const std::string& model_path, const std::string& modality_arg, int window_ms,
              int iterations, std::uint64_t seed, bool json_output, std::ostream& out) {
  if (model_path.empty()) throw UsageError("bench needs --model (or model_path in --config)");
  if (modality_arg.empty())
    throw UsageError("bench needs --modality (or modality in --config)");

  const Modality modality = modality_from_arg(modality_arg);
  const Classifier classifier = Classifier::load(model_path, modality);
  const BenchStats stats = bench(classifier, window_ms, iterations, seed);

  if (json_output) {
    out << bench_json(stats) << '\n';
  } else {
    out << "iterations " << stats.iterations << ", predicted "
        << gesture_name(static_cast<Gesture>(stats.predicted)) << ", min " << stats.min_us
        << " us, mean " << stats.mean_us << " us, p95 " << stats.p95_us << " us\n";
  }
  return 0;
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  bool json_output = false;
  try {
    const Defaults defaults = load_defaults(args);

    CLI::App app{"EMG + event-camera gesture classification toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON file with pipeline defaults");
    app.add_flag("--json", json_output, "machine-readable output");
    std::uint64_t seed = defaults.seed;
    app.add_option("--seed", seed, "seed for every stochastic stage");

    // convert
    auto* convert = app.add_subcommand("convert", "model container <-> JSON");
    convert->fallthrough();
    std::string cv_model, cv_dataset, cv_out;
    convert->add_option("--model", cv_model, "model file (.json imports, otherwise exports)");
    convert->add_option("--dataset", cv_dataset, "archive directory to map to sessions");
    convert->add_option("--out", cv_out, "output path");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "dump frames, features or model info");
    inspect->fallthrough();
    std::string in_events, in_emg, in_session, in_model, in_out;
    int in_window = defaults.window_ms;
    inspect->add_option("--events", in_events, "AEDAT event file");
    inspect->add_option("--emg", in_emg, "EMG CSV file");
    inspect->add_option("--session", in_session, "session manifest");
    inspect->add_option("--model", in_model, "model file to describe");
    inspect->add_option("--window", in_window, "window length in ms");
    inspect->add_option("--out", in_out, "output directory or file");

    // train
    auto* train = app.add_subcommand("train", "train a model on session data");
    train->fallthrough();
    std::string tr_modality = defaults.modality, tr_kind = "cnn", tr_data, tr_out;
    int tr_window = defaults.window_ms, tr_epochs = 100, tr_batch = 32, tr_fusion_epochs = 50;
    bool tr_logits = false;
    double tr_c = 10.0;
    train->add_option("--modality", tr_modality, "EMG|DVS|DAV|FRM|FUS-DVS|FUS-DAV|FUS-FRM");
    train->add_option("--model", tr_kind, "cnn|svm-linear|svm-rbf");
    train->add_option("--data", tr_data, "directory of session manifests")->required();
    train->add_option("--window", tr_window, "window length in ms");
    train->add_option("--out", tr_out, "model output path");
    train->add_option("--epochs", tr_epochs, "network training epochs");
    train->add_option("--batch", tr_batch, "mini-batch size");
    train->add_option("--fusion-epochs", tr_fusion_epochs, "perceptron-layer epochs");
    train->add_flag("--use-logits", tr_logits, "fuse pre-softmax activities");
    train->add_option("--svm-c", tr_c, "slack penalty for margin models");

    // eval
    auto* eval = app.add_subcommand("eval", "cross-validated accuracy report");
    eval->fallthrough();
    std::vector<std::string> ev_modalities, ev_kinds;
    std::string ev_data, ev_out;
    int ev_window = defaults.window_ms, ev_folds = 5, ev_epochs = 100, ev_batch = 32;
    int ev_fusion_epochs = 50;
    bool ev_logits = false, ev_subject = false;
    double ev_c = 10.0;
    eval->add_option("--modality", ev_modalities, "modalities (repeat or comma list)");
    eval->add_option("--model", ev_kinds, "model kinds (repeat or comma list)");
    eval->add_option("--data", ev_data, "directory of session manifests")->required();
    eval->add_option("--window", ev_window, "window length in ms");
    eval->add_option("--folds", ev_folds, "cross-validation folds");
    eval->add_flag("--per-subject", ev_subject, "group folds by subject");
    eval->add_option("--epochs", ev_epochs, "network training epochs");
    eval->add_option("--batch", ev_batch, "mini-batch size");
    eval->add_option("--fusion-epochs", ev_fusion_epochs, "perceptron-layer epochs");
    eval->add_flag("--use-logits", ev_logits, "fuse pre-softmax activities");
    eval->add_option("--svm-c", ev_c, "slack penalty for margin models");
    eval->add_option("--out", ev_out, "write the report here instead of stdout");

    // replay
    auto* replay = app.add_subcommand("replay", "stream a session through the runtime");
    replay->fallthrough();
    std::string rp_session, rp_model = defaults.model_path, rp_modality = defaults.modality;
    std::string rp_out;
    PipelineConfig rp_config;
    rp_config.window_ms = defaults.window_ms;
    rp_config.realtime = defaults.realtime;
    rp_config.queue_capacity = defaults.queue_capacity;
    rp_config.keep_latest = defaults.keep_latest;
    rp_config.processing_delay_us = defaults.processing_delay_us;
    bool rp_no_drop = !defaults.keep_latest;
    replay->add_option("--session", rp_session, "session manifest")->required();
    replay->add_option("--model", rp_model, "model file");
    replay->add_option("--modality", rp_modality, "modality the model serves");
    replay->add_option("--window", rp_config.window_ms, "window length in ms");
    replay->add_flag("--realtime", rp_config.realtime, "pace by original timestamps");
    replay->add_flag("--no-drop", rp_no_drop, "block producers instead of dropping");
    replay->add_option("--capacity", rp_config.queue_capacity, "queue capacity in windows");
    replay->add_option("--delay-us", rp_config.processing_delay_us,
                       "artificial processing delay per window");
    replay->add_option("--out", rp_out, "write record lines here instead of stdout");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "inference latency statistics");
    bench_cmd->fallthrough();
    std::string bn_model = defaults.model_path, bn_modality = defaults.modality;
    int bn_window = defaults.window_ms, bn_iterations = 100;
    bench_cmd->add_option("--model", bn_model, "model file");
    bench_cmd->add_option("--modality", bn_modality, "modality the model serves");
    bench_cmd->add_option("--window", bn_window, "window length in ms");
    bench_cmd->add_option("--iterations", bn_iterations, "number of timed inferences");

    std::vector<const char*> argv;
    argv.push_back("gestfuse");
    for (const std::string& arg : args) argv.push_back(arg.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
      out << app.help();
      return 0;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      if (e.get_name() == "RequiredError" || args.empty()) err << app.help();
      return 2;
    }

    if (convert->parsed()) return run_convert(cv_model, cv_dataset, cv_out, json_output, out);
    if (inspect->parsed())
      return run_inspect(in_events, in_emg, in_session, in_model, in_window, in_out,
                         json_output, out);
    if (train->parsed())
      return run_train(tr_modality, tr_kind, tr_data, tr_window, tr_out, tr_epochs, tr_batch,
                       tr_fusion_epochs, tr_logits, tr_c, seed, json_output, out);
    if (eval->parsed())
      return run_eval(ev_modalities, ev_kinds, ev_data, ev_window, ev_folds, ev_subject,
                      ev_epochs, ev_batch, ev_fusion_epochs, ev_logits, ev_c, seed, ev_out,
                      json_output, out);
    if (replay->parsed()) {
      rp_config.keep_latest = !rp_no_drop;
      return run_replay_cmd(rp_session, rp_model, rp_modality, rp_config, rp_out, json_output,
                            out);
    }
    if (bench_cmd->parsed())
      return run_bench(bn_model, bn_modality, bn_window, bn_iterations, seed, json_output, out);
    err << "error: no subcommand\n" << app.help();
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    if (json_output) {
      ordered_json j;
      j["error"] = {{"code", errc_name(e.code())}, {"message", e.what()}};
      err << j.dump() << '\n';
    } else {
      err << "error: " << e.what() << '\n';
    }
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace gestfuse
