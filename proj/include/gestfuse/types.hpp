#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gestfuse {

// One address-event: pixel position in the sensor array, session-relative
// microsecond timestamp and ON/OFF polarity.
struct DvsEvent {
  uint16_t x = 0;
  uint16_t y = 0;
  int64_t t_us = 0;
  bool on = false;

  friend bool operator==(const DvsEvent&, const DvsEvent&) = default;
};

enum class SensorKind { dvs128, davis240 };

struct SensorGeometry {
  uint16_t width = 128;
  uint16_t height = 128;
  SensorKind kind = SensorKind::dvs128;

  friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

SensorGeometry geometry_for(SensorKind kind);
const char* sensor_kind_name(SensorKind kind);

// The five static gestures.
enum class Gesture : int { pinky = 0, elle = 1, yo = 2, index = 3, thumb = 4 };

inline constexpr int kGestureCount = 5;

const char* gesture_name(Gesture g);
Gesture parse_gesture(const std::string& name);

// Multi-channel sampled EMG signal. Rows are stored flat, one row of
// channel_count raw amplitudes per timestep; t_us holds the per-row
// session-relative timestamps.
struct EmgRecording {
  double sample_rate = 0.0;  // Hz
  std::size_t channel_count = 0;
  std::vector<int64_t> t_us;
  std::vector<double> data;  // row-major, t_us.size() x channel_count
  int64_t t0 = 0;

  std::size_t sample_count() const { return t_us.size(); }

  std::span<const double> sample(std::size_t i) const {
    return {data.data() + i * channel_count, channel_count};
  }
};

// Conventional grayscale frame from the active-pixel readout.
struct ApsFrame {
  uint16_t width = 0;
  uint16_t height = 0;
  std::vector<double> pixels;  // [0,1], row-major
  int64_t t_us = 0;
};

struct GestureInterval {
  Gesture label = Gesture::pinky;
  int64_t start_us = 0;
  int64_t end_us = 0;
};

struct SessionManifest {
  std::string subject;
  std::string session;
  std::filesystem::path events_file;
  std::filesystem::path emg_file;
  std::optional<std::filesystem::path> aps_dir;
  std::vector<GestureInterval> annotations;
};

// One T-ms slice of a session: the EMG rows, events and APS frames whose
// timestamps fall in [t_start, t_end), plus the gesture label when the
// window lies inside an annotated interval. Immutable once built; safe to
// hand across threads.
struct SyncWindow {
  std::size_t n = 0;
  int64_t t_start = 0;
  int64_t t_end = 0;
  EmgRecording emg;  // slice, same channel layout as the source recording
  std::vector<DvsEvent> events;
  std::vector<ApsFrame> aps;
  std::optional<Gesture> label;
};

struct Session {
  SessionManifest manifest;
  SensorGeometry geometry;
  std::vector<DvsEvent> events;
  EmgRecording emg;
  std::vector<ApsFrame> aps;
};

}  // namespace gestfuse
