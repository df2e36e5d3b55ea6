#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "gestfuse/types.hpp"

namespace gestfuse {

// Per-window time-domain EMG feature vector: the per-channel mean absolute
// values followed by the per-channel root mean squares, length 2*C.
struct EmgFeatureVector {
  std::vector<double> values;
  std::size_t n = 0;
};

// (1/N) * sum |x_i|
double mav(std::span<const double> channel_samples);

// sqrt((1/N) * sum x_i^2)
double rms(std::span<const double> channel_samples);

// [MAV(ch0)..MAV(chC-1), RMS(ch0)..RMS(chC-1)] over the window's EMG rows.
// No mean removal or windowing function is applied.
EmgFeatureVector emg_feature_vector(const SyncWindow& window);

// CSV rows `n,f0,..,f{2C-1}` with a header, for the inspect command.
void write_feature_csv(std::ostream& out, std::span<const EmgFeatureVector> features);

}  // namespace gestfuse
