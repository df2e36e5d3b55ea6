#include "gestfuse/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <random>
#include <thread>

#include <json.hpp>

#include "gestfuse/cnn_io.hpp"
#include "gestfuse/error.hpp"
#include "gestfuse/fgcn.hpp"
#include "gestfuse/session.hpp"

namespace gestfuse {

namespace {

using nlohmann::ordered_json;

std::size_t expected_svm_dim(Modality modality) {
  if (modality == Modality::EMG) return 16;
  return is_fusion(modality) ? 916 : kHogLength;
}

int argmax5(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

double percentile95(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(values.size())));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

}  // namespace

Classifier Classifier::load(const std::filesystem::path& path, Modality modality) {
  if (path.empty() || !std::filesystem::exists(path))
    raise(Errc::missing_model, "model file '" + path.string() + "' not found");

  if (path.extension() == ".json") return from_svm(load_svm(path), modality);

  const FgcnContent content = read_fgcn_file(path);
  const auto descriptor = nlohmann::json::parse(content.descriptor, nullptr, false);
  if (descriptor.is_discarded() || !descriptor.contains("kind"))
    raise(Errc::io_error, "model container lacks a readable descriptor");
  const std::string kind = descriptor["kind"].get<std::string>();
  if (kind == "fusion") return from_fusion(load_fusion(path), modality);
  if (kind == "cnn") return from_cnn(load_cnn(path), modality);
  raise(Errc::io_error, "unsupported model kind '" + kind + "'");
}

Classifier Classifier::from_cnn(CnnModel model, Modality modality) {
  if (is_fusion(modality))
    raise(Errc::model_modality_mismatch,
          "a single network cannot serve fusion modality " +
              std::string(modality_name(modality)));
  if (model.modality() != modality_name(modality))
    raise(Errc::model_modality_mismatch, "network was trained for " + model.modality() +
                                             ", configured modality is " +
                                             modality_name(modality));
  Classifier c;
  c.modality_ = modality;
  c.cnn_ = std::make_shared<const CnnModel>(std::move(model));
  return c;
}

Classifier Classifier::from_fusion(FusionModel model, Modality modality) {
  if (!is_fusion(modality))
    raise(Errc::model_modality_mismatch,
          "a fusion stack cannot serve single modality " +
              std::string(modality_name(modality)));
  const std::string want = modality_name(vision_source_of(modality));
  if (model.vision_cnn.modality() != want)
    raise(Errc::model_modality_mismatch,
          "fusion stack pairs EMG with " + model.vision_cnn.modality() +
              ", configured modality needs " + want);
  Classifier c;
  c.modality_ = modality;
  c.fusion_ = std::make_shared<const FusionModel>(std::move(model));
  return c;
}

Classifier Classifier::from_svm(MulticlassSvmModel model, Modality modality) {
  // The margin-model file carries no modality tag; the feature dimension is
  // the strongest available check (16 vs 900 vs 916).
  if (model.dim != expected_svm_dim(modality))
    raise(Errc::model_modality_mismatch,
          "model expects " + std::to_string(model.dim) + "-dim features, modality " +
              modality_name(modality) + " produces " +
              std::to_string(expected_svm_dim(modality)));
  Classifier c;
  c.modality_ = modality;
  c.svm_ = std::make_shared<const MulticlassSvmModel>(std::move(model));
  return c;
}

std::pair<int, std::array<double, kGestureCount>> Classifier::classify(
    const SyncWindow& window, const SensorGeometry& geometry) const {
  const bool needs_emg = modality_ == Modality::EMG || is_fusion(modality_);
  const bool needs_vision = modality_ != Modality::EMG;

  Tensor emg;
  Tensor vision;
  if (needs_emg) emg = emg_tensor(window);
  if (needs_vision) vision = vision_tensor(window, geometry, vision_source_of(modality_));

  std::array<double, kGestureCount> scores{};
  if (svm_) {
    const auto row = svm_feature_row(emg, vision, modality_);
    const auto [label, decisions] = predict(*svm_, row);
    for (std::size_t i = 0; i < svm_->class_labels.size(); ++i) {
      const int cls = svm_->class_labels[i];
      if (cls >= 0 && cls < kGestureCount) scores[static_cast<std::size_t>(cls)] = decisions[i];
    }
    return {label, scores};
  }

  std::vector<double> p;
  if (fusion_) {
    p = fusion_forward(*fusion_, emg, vision);
  } else {
    p = cnn_->forward(modality_ == Modality::EMG ? emg : vision);
  }
  std::copy(p.begin(), p.end(), scores.begin());
  return {argmax5(p), scores};
}

namespace {

struct LabeledRecord {
  ClassificationRecord record;
  std::optional<Gesture> truth;
};

ReplaySummary finalize_summary(const std::vector<ClassificationRecord>& records,
                               std::size_t total, std::size_t labeled, std::size_t correct) {
  ReplaySummary summary;
  summary.total_windows = total;
  summary.classified = records.size();
  summary.dropped = total - records.size();
  summary.labeled = labeled;
  summary.correct = correct;
  summary.accuracy =
      labeled == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(labeled);
  if (!records.empty()) {
    std::vector<double> latencies;
    latencies.reserve(records.size());
    double sum = 0.0;
    for (const auto& r : records) {
      latencies.push_back(static_cast<double>(r.latency_us));
      sum += static_cast<double>(r.latency_us);
    }
    summary.mean_latency_us = sum / static_cast<double>(latencies.size());
    summary.p95_latency_us = percentile95(std::move(latencies));
  }
  return summary;
}

ClassificationRecord classify_window(const Classifier& classifier, const SyncWindow& window,
                                     const SensorGeometry& geometry,
                                     std::int64_t extra_delay_us) {
  const auto begin = std::chrono::steady_clock::now();
  if (extra_delay_us > 0)
    std::this_thread::sleep_for(std::chrono::microseconds(extra_delay_us));
  const auto [predicted, scores] = classifier.classify(window, geometry);
  const auto end = std::chrono::steady_clock::now();

  ClassificationRecord record;
  record.n = window.n;
  record.t_start_us = window.t_start;
  record.t_end_us = window.t_end;
  record.predicted = predicted;
  record.scores = scores;
  record.latency_us =
      std::chrono::duration_cast<std::chrono::microseconds>(end - begin).count();
  return record;
}

}  // namespace

ReplayResult classify_session(const Session& session, const Classifier& classifier,
                              int window_ms) {
  if (window_ms <= 0) raise(Errc::bad_config, "window must be positive");
  const std::vector<SyncWindow> windows = window_slices(session, window_ms);

  ReplayResult result;
  std::size_t labeled = 0;
  std::size_t correct = 0;
  for (const SyncWindow& window : windows) {
    ClassificationRecord record = classify_window(classifier, window, session.geometry, 0);
    if (window.label) {
      ++labeled;
      if (record.predicted == static_cast<int>(*window.label)) ++correct;
    }
    result.records.push_back(std::move(record));
  }
  result.summary = finalize_summary(result.records, windows.size(), labeled, correct);
  return result;
}

namespace {

struct VisionBatch {
  std::size_t n = 0;
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
  std::vector<DvsEvent> events;
  std::vector<ApsFrame> aps;
  std::optional<Gesture> label;
};

struct EmgBatch {
  std::size_t n = 0;
  EmgRecording emg;
};

}  // namespace

ReplayResult run_replay(const Session& session, const Classifier& classifier,
                        const PipelineConfig& config) {
  if (config.window_ms <= 0) raise(Errc::bad_config, "window must be positive");
  if (config.queue_capacity < 1) raise(Errc::bad_config, "queue capacity must be at least 1");

  const std::vector<SyncWindow> windows = window_slices(session, config.window_ms);
  ReplayResult result;
  if (windows.empty()) {
    result.summary = finalize_summary(result.records, 0, 0, 0);
    return result;
  }

  BoundedQueue<VisionBatch> vision_queue(config.queue_capacity, config.keep_latest);
  BoundedQueue<EmgBatch> emg_queue(config.queue_capacity, config.keep_latest);
  // Records are never dropped: the output role must see every classification.
  BoundedQueue<LabeledRecord> record_queue(config.queue_capacity, false);

  const auto run_start = std::chrono::steady_clock::now();
  const std::int64_t first_start = windows.front().t_start;
  auto pace = [&](std::int64_t t_start) {
    if (!config.realtime) return;
    std::this_thread::sleep_until(run_start +
                                  std::chrono::microseconds(t_start - first_start));
  };

  // Role 1: event-camera source.
  std::thread vision_source([&] {
    for (const SyncWindow& w : windows) {
      pace(w.t_start);
      VisionBatch batch;
      batch.n = w.n;
      batch.t_start = w.t_start;
      batch.t_end = w.t_end;
      batch.events = w.events;
      batch.aps = w.aps;
      batch.label = w.label;
      vision_queue.push(std::move(batch));
    }
    vision_queue.close();
  });

  // Role 2: EMG source.
  std::thread emg_source([&] {
    for (const SyncWindow& w : windows) {
      pace(w.t_start);
      EmgBatch batch;
      batch.n = w.n;
      batch.emg = w.emg;
      emg_queue.push(std::move(batch));
    }
    emg_queue.close();
  });

  // Role 3: processing — joins the two streams by window index and runs the
  // model. Windows resolve strictly in index order: the oldest outstanding
  // index is classified once both halves arrived, or marked dropped as soon
  // as a half can no longer arrive (its source has already emitted a later
  // index, or finished). Sources emit indices in increasing order, so this
  // detection is exact and needs no wall-clock timeout at replay speed.
  std::thread processing([&] {
    std::map<std::size_t, VisionBatch> vision_pending;
    std::map<std::size_t, EmgBatch> emg_pending;
    std::deque<std::size_t> outstanding;
    for (const SyncWindow& w : windows) outstanding.push_back(w.n);
    std::map<std::size_t, const SyncWindow*> by_index;
    for (const SyncWindow& w : windows) by_index[w.n] = &w;

    std::int64_t vision_max = -1;
    std::int64_t emg_max = -1;
    bool vision_done = false;
    bool emg_done = false;

    auto drain = [&] {
      while (auto batch = vision_queue.try_pop()) {
        vision_max = std::max(vision_max, static_cast<std::int64_t>(batch->n));
        vision_pending.emplace(batch->n, std::move(*batch));
      }
      while (auto batch = emg_queue.try_pop()) {
        emg_max = std::max(emg_max, static_cast<std::int64_t>(batch->n));
        emg_pending.emplace(batch->n, std::move(*batch));
      }
      vision_done = vision_queue.closed_and_empty();
      emg_done = emg_queue.closed_and_empty();
    };

    while (!outstanding.empty()) {
      drain();
      bool progressed = false;
      while (!outstanding.empty()) {
        const std::size_t n = outstanding.front();
        const auto v = vision_pending.find(n);
        const auto e = emg_pending.find(n);
        if (v != vision_pending.end() && e != emg_pending.end()) {
          SyncWindow window;
          window.n = n;
          window.t_start = v->second.t_start;
          window.t_end = v->second.t_end;
          window.emg = std::move(e->second.emg);
          window.events = std::move(v->second.events);
          window.aps = std::move(v->second.aps);
          window.label = v->second.label;
          LabeledRecord out;
          out.truth = window.label;
          out.record = classify_window(classifier, window, session.geometry,
                                       config.processing_delay_us);
          record_queue.push(std::move(out));
          vision_pending.erase(v);
          emg_pending.erase(e);
          outstanding.pop_front();
          progressed = true;
          drain();
          continue;
        }
        const bool vision_lost =
            v == vision_pending.end() &&
            (vision_done || vision_max > static_cast<std::int64_t>(n));
        const bool emg_lost =
            e == emg_pending.end() && (emg_done || emg_max > static_cast<std::int64_t>(n));
        if (vision_lost || emg_lost) {
          if (v != vision_pending.end()) vision_pending.erase(v);
          if (e != emg_pending.end()) emg_pending.erase(e);
          outstanding.pop_front();
          progressed = true;
          continue;
        }
        break;
      }
      if (!progressed && !outstanding.empty()) {
        if (auto batch = vision_queue.pop_wait_for(std::chrono::microseconds(500))) {
          vision_max = std::max(vision_max, static_cast<std::int64_t>(batch->n));
          vision_pending.emplace(batch->n, std::move(*batch));
        } else if (auto sample = emg_queue.pop_wait_for(std::chrono::microseconds(500))) {
          emg_max = std::max(emg_max, static_cast<std::int64_t>(sample->n));
          emg_pending.emplace(sample->n, std::move(*sample));
        }
      }
    }
    record_queue.close();
  });

  // Role 4: output — owns the record list and the summary accumulator.
  std::size_t labeled = 0;
  std::size_t correct = 0;
  std::thread output([&] {
    while (auto item = record_queue.pop()) {
      if (item->truth) {
        ++labeled;
        if (item->record.predicted == static_cast<int>(*item->truth)) ++correct;
      }
      result.records.push_back(std::move(item->record));
    }
  });

  vision_source.join();
  emg_source.join();
  processing.join();
  output.join();

  result.summary = finalize_summary(result.records, windows.size(), labeled, correct);
  return result;
}

BenchStats bench(const Classifier& classifier, int window_ms, int iterations,
                 std::uint64_t seed) {
  if (iterations < 1) raise(Errc::bad_config, "need at least one iteration");
  if (window_ms <= 0) raise(Errc::bad_config, "window must be positive");

  const Modality m = classifier.modality();
  const SensorGeometry geometry =
      (m == Modality::EMG || vision_source_of(m) == Modality::DVS)
          ? geometry_for(SensorKind::dvs128)
          : geometry_for(SensorKind::davis240);

  // One synthetic window reused for every iteration.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  SyncWindow window;
  window.n = 0;
  window.t_start = 0;
  window.t_end = static_cast<std::int64_t>(window_ms) * 1000;
  window.emg.sample_rate = 200.0;
  window.emg.channel_count = 8;
  const int rows = std::max(1, window_ms / 5);
  for (int r = 0; r < rows; ++r) {
    window.emg.t_us.push_back(r * 5000);
    for (int c = 0; c < 8; ++c) window.emg.data.push_back(noise(rng));
  }
  std::uniform_int_distribution<int> dx(-10, 10);
  for (int i = 0; i < 400; ++i) {
    DvsEvent event;
    event.x = static_cast<uint16_t>(geometry.width / 2 + dx(rng));
    event.y = static_cast<uint16_t>(geometry.height / 2 + dx(rng));
    event.t_us = i * (window.t_end / 400);
    event.on = (i % 2) == 0;
    window.events.push_back(event);
  }
  if (m != Modality::EMG && vision_source_of(m) == Modality::FRM) {
    for (int f = 0; f < 2; ++f) {
      ApsFrame frame;
      frame.width = geometry.width;
      frame.height = geometry.height;
      frame.t_us = f * 50000;
      frame.pixels.resize(static_cast<std::size_t>(geometry.width) * geometry.height);
      for (double& p : frame.pixels) p = std::abs(noise(rng));
      window.aps.push_back(std::move(frame));
    }
  }

  BenchStats stats;
  stats.iterations = iterations;
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(iterations));
  for (int i = 0; i < iterations; ++i) {
    const auto begin = std::chrono::steady_clock::now();
    const auto [predicted, scores] = classifier.classify(window, geometry);
    const auto end = std::chrono::steady_clock::now();
    (void)scores;
    stats.predicted = predicted;
    times.push_back(
        std::chrono::duration_cast<std::chrono::duration<double, std::micro>>(end - begin)
            .count());
  }
  stats.min_us = *std::min_element(times.begin(), times.end());
  double sum = 0.0;
  for (double t : times) sum += t;
  stats.mean_us = sum / static_cast<double>(times.size());
  stats.p95_us = percentile95(std::move(times));
  return stats;
}

std::string record_json_line(const ClassificationRecord& record) {
  ordered_json j;
  j["n"] = record.n;
  j["t_start_us"] = record.t_start_us;
  j["t_end_us"] = record.t_end_us;
  j["label"] = gesture_name(static_cast<Gesture>(record.predicted));
  j["scores"] = record.scores;
  j["latency_us"] = record.latency_us;
  return j.dump();
}

std::string summary_json(const ReplaySummary& summary) {
  ordered_json j;
  j["total_windows"] = summary.total_windows;
  j["classified"] = summary.classified;
  j["dropped"] = summary.dropped;
  j["labeled"] = summary.labeled;
  j["correct"] = summary.correct;
  j["accuracy"] = summary.accuracy;
  j["mean_latency_us"] = summary.mean_latency_us;
  j["p95_latency_us"] = summary.p95_latency_us;
  return j.dump();
}

std::string bench_json(const BenchStats& stats) {
  ordered_json j;
  j["iterations"] = stats.iterations;
  j["predicted"] = gesture_name(static_cast<Gesture>(stats.predicted));
  j["min_us"] = stats.min_us;
  j["mean_us"] = stats.mean_us;
  j["p95_us"] = stats.p95_us;
  return j.dump();
}

}  // namespace gestfuse
