#pragma once

// Deliberately naive reference computations used to pin expected values.
// Everything here recomputes results from first principles with plain loops,
// independent of the library's data layouts and accumulation tricks.

#include <cmath>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "gestfuse/types.hpp"

namespace oracle {

inline double mav(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x < 0 ? -x : x;
  return s / static_cast<double>(xs.size());
}

inline double rms(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x * x;
  return std::sqrt(s / static_cast<double>(xs.size()));
}

// (x, y) -> event count, only for pixels that saw events.
inline std::map<std::pair<int, int>, unsigned> event_tally(
    const std::vector<gestfuse::DvsEvent>& events) {
  std::map<std::pair<int, int>, unsigned> tally;
  for (const auto& e : events) ++tally[{e.x, e.y}];
  return tally;
}

// Intensity centroid over a dense count grid; returns false when empty.
inline bool centroid(const std::vector<unsigned>& counts, int width, int height, double* cx,
                     double* cy) {
  double m00 = 0, m10 = 0, m01 = 0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double c = counts[static_cast<std::size_t>(y) * width + x];
      m00 += c;
      m10 += c * x;
      m01 += c * y;
    }
  if (m00 == 0) return false;
  *cx = m10 / m00;
  *cy = m01 / m00;
  return true;
}

// Mean over each 2x2 block of a side x side image.
inline std::vector<double> block_mean_2x2(const std::vector<double>& img, int side) {
  const int half = side / 2;
  std::vector<double> out(static_cast<std::size_t>(half) * half);
  for (int r = 0; r < half; ++r)
    for (int c = 0; c < half; ++c) {
      double s = 0.0;
      for (int dr = 0; dr < 2; ++dr)
        for (int dc = 0; dc < 2; ++dc)
          s += img[static_cast<std::size_t>(2 * r + dr) * side + (2 * c + dc)];
      out[static_cast<std::size_t>(r) * half + c] = s / 4.0;
    }
  return out;
}

// Unnormalized 9-bin orientation histogram of one cell, recomputed with the
// same gradient convention the library documents (central differences,
// replicated borders, unsigned angles, hard binning).
inline std::vector<double> cell_histogram(const std::vector<double>& img, int side, int cell_x0,
                                          int cell_y0, int cell_side) {
  auto px = [&](int x, int y) {
    x = x < 0 ? 0 : (x >= side ? side - 1 : x);
    y = y < 0 ? 0 : (y >= side ? side - 1 : y);
    return img[static_cast<std::size_t>(y) * side + x];
  };
  std::vector<double> hist(9, 0.0);
  for (int y = cell_y0; y < cell_y0 + cell_side; ++y)
    for (int x = cell_x0; x < cell_x0 + cell_side; ++x) {
      const double gx = px(x + 1, y) - px(x - 1, y);
      const double gy = px(x, y + 1) - px(x, y - 1);
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag == 0.0) continue;
      double deg = std::atan2(gy, gx) * 180.0 / 3.14159265358979323846;
      if (deg < 0) deg += 180.0;
      if (deg >= 180.0) deg -= 180.0;
      int bin = static_cast<int>(deg / 20.0);
      if (bin > 8) bin = 8;
      hist[static_cast<std::size_t>(bin)] += mag;
    }
  return hist;
}

inline double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Population standard deviation.
inline double stddev(const std::vector<double>& xs) {
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

}  // namespace oracle
