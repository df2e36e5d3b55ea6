#include "gestfuse/emg_features.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "gestfuse/error.hpp"

namespace gestfuse {

double mav(std::span<const double> channel_samples) {
  if (channel_samples.empty()) raise(Errc::empty_window, "MAV of zero samples");
  double acc = 0.0;
  for (double v : channel_samples) acc += std::abs(v);
  return acc / static_cast<double>(channel_samples.size());
}

double rms(std::span<const double> channel_samples) {
  if (channel_samples.empty()) raise(Errc::empty_window, "RMS of zero samples");
  double acc = 0.0;
  for (double v : channel_samples) acc += v * v;
  return std::sqrt(acc / static_cast<double>(channel_samples.size()));
}

EmgFeatureVector emg_feature_vector(const SyncWindow& window) {
  const EmgRecording& emg = window.emg;
  const std::size_t rows = emg.sample_count();
  const std::size_t chans = emg.channel_count;
  if (rows == 0)
    raise(Errc::empty_window,
          "window " + std::to_string(window.n) + " holds no EMG samples");

  // Column-wise accumulation over the row-major sample block.
  std::vector<double> abs_sum(chans, 0.0);
  std::vector<double> sq_sum(chans, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = emg.data.data() + r * chans;
    for (std::size_t c = 0; c < chans; ++c) {
      abs_sum[c] += std::abs(row[c]);
      sq_sum[c] += row[c] * row[c];
    }
  }

  EmgFeatureVector out;
  out.n = window.n;
  out.values.resize(2 * chans);
  const double inv_n = 1.0 / static_cast<double>(rows);
  for (std::size_t c = 0; c < chans; ++c) {
    out.values[c] = abs_sum[c] * inv_n;
    out.values[chans + c] = std::sqrt(sq_sum[c] * inv_n);
  }
  return out;
}

void write_feature_csv(std::ostream& out, std::span<const EmgFeatureVector> features) {
  const std::size_t dim = features.empty() ? 16 : features.front().values.size();
  out << 'n';
  for (std::size_t i = 0; i < dim; ++i) out << ",f" << i;
  out << '\n';
  char buf[64];
  for (const EmgFeatureVector& f : features) {
    out << f.n;
    for (double v : f.values) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace gestfuse
