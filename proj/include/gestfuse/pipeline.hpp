#pragma once

#include <array>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gestfuse/cnn.hpp"
#include "gestfuse/fusion.hpp"
#include "gestfuse/svm.hpp"
#include "gestfuse/types.hpp"

namespace gestfuse {

// Single-producer/single-consumer hand-off buffer with a hard capacity.
// Under keep_latest the producer never waits on a full buffer: the oldest
// queued item is evicted (and counted) to make room. Otherwise push blocks
// until space frees up. close() wakes everyone; pop returns nullopt once
// the queue is closed and drained.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity, bool keep_latest)
      : capacity_(capacity == 0 ? 1 : capacity), keep_latest_(keep_latest) {}

  // Returns false when the queue is already closed.
  bool push(T value) {
    std::unique_lock lock(mutex_);
    if (keep_latest_) {
      if (closed_) return false;
      if (items_.size() == capacity_) {
        items_.pop_front();
        ++evicted_;
      }
    } else {
      space_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
      if (closed_) return false;
    }
    items_.push_back(std::move(value));
    ready_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [&] { return !items_.empty() || closed_; });
    return take(lock);
  }

  std::optional<T> try_pop() {
    std::unique_lock lock(mutex_);
    return take(lock);
  }

  template <typename Rep, typename Period>
  std::optional<T> pop_wait_for(std::chrono::duration<Rep, Period> timeout) {
    std::unique_lock lock(mutex_);
    ready_.wait_for(lock, timeout, [&] { return !items_.empty() || closed_; });
    return take(lock);
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    ready_.notify_all();
    space_.notify_all();
  }

  bool closed_and_empty() const {
    std::lock_guard lock(mutex_);
    return closed_ && items_.empty();
  }

  std::size_t evicted() const {
    std::lock_guard lock(mutex_);
    return evicted_;
  }

 private:
  std::optional<T> take(std::unique_lock<std::mutex>& lock) {
    if (items_.empty()) return std::nullopt;
    T value = std::move(items_.front());
    items_.pop_front();
    space_.notify_one();
    lock.unlock();
    return value;
  }

  const std::size_t capacity_;
  const bool keep_latest_;
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::condition_variable space_;
  std::deque<T> items_;
  bool closed_ = false;
  std::size_t evicted_ = 0;
};

struct PipelineConfig {
  int window_ms = 200;                 // > 0
  Modality modality = Modality::FUS_DVS;
  std::filesystem::path model_path;
  bool realtime = false;               // pace emission by original timestamps
  std::size_t queue_capacity = 8;      // >= 1
  bool keep_latest = true;             // false = block producers instead of dropping
  std::int64_t processing_delay_us = 0;  // artificial per-window slowdown (testing)
};

struct ClassificationRecord {
  std::size_t n = 0;
  std::int64_t t_start_us = 0;
  std::int64_t t_end_us = 0;
  int predicted = 0;
  std::array<double, kGestureCount> scores{};  // probabilities (networks) or
                                               // per-class decision values
  std::int64_t latency_us = 0;
};

struct ReplaySummary {
  std::size_t total_windows = 0;
  std::size_t classified = 0;
  std::size_t dropped = 0;  // total - classified
  std::size_t labeled = 0;  // classified windows carrying a label
  std::size_t correct = 0;
  double accuracy = 0.0;  // correct / labeled, 0 when nothing is labeled
  double mean_latency_us = 0.0;
  double p95_latency_us = 0.0;  // nearest-rank percentile
};

struct ReplayResult {
  std::vector<ClassificationRecord> records;  // strictly increasing n
  ReplaySummary summary;
};

// One trained model of any supported kind, bound to the modality it serves.
// Immutable after loading; classify is safe from multiple threads.
class Classifier {
 public:
  // Reads a model container (.fgcn holding a network or a fusion stack) or a
  // maximum-margin model (.json). Raises MissingModel when the file is
  // absent and ModelModalityMismatch when the file serves another modality.
  static Classifier load(const std::filesystem::path& path, Modality modality);

  static Classifier from_cnn(CnnModel model, Modality modality);
  static Classifier from_fusion(FusionModel model, Modality modality);
  static Classifier from_svm(MulticlassSvmModel model, Modality modality);

  Modality modality() const { return modality_; }

  // Predicted class and the per-class scores for one window.
  std::pair<int, std::array<double, kGestureCount>> classify(
      const SyncWindow& window, const SensorGeometry& geometry) const;

 private:
  Classifier() = default;

  Modality modality_ = Modality::EMG;
  // Exactly one of these is set.
  std::shared_ptr<const CnnModel> cnn_;
  std::shared_ptr<const FusionModel> fusion_;
  std::shared_ptr<const MulticlassSvmModel> svm_;
};

// Offline reference path: classify every labeled window in session order.
ReplayResult classify_session(const Session& session, const Classifier& classifier,
                              int window_ms);

// Four concurrent roles — event source, EMG source, processing, output —
// joined by bounded queues. Every labeled window of the session ends up
// either classified (one record, emitted in increasing window order) or
// counted as dropped.
ReplayResult run_replay(const Session& session, const Classifier& classifier,
                        const PipelineConfig& config);

struct BenchStats {
  int iterations = 0;
  int predicted = 0;  // the (identical) prediction of every iteration
  double min_us = 0.0;
  double mean_us = 0.0;
  double p95_us = 0.0;
};

// Times classify() on one synthetic window, iterations >= 1.
BenchStats bench(const Classifier& classifier, int window_ms, int iterations,
                 std::uint64_t seed);

// {"n":..,"t_start_us":..,"t_end_us":..,"label":..,"scores":[..],"latency_us":..}
std::string record_json_line(const ClassificationRecord& record);
std::string summary_json(const ReplaySummary& summary);
std::string bench_json(const BenchStats& stats);

}  // namespace gestfuse
