#include "gestfuse/vision_features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gestfuse/error.hpp"

namespace gestfuse {

EventFrame accumulate_event_frame(const SyncWindow& window, const SensorGeometry& geometry) {
  EventFrame frame;
  frame.width = geometry.width;
  frame.height = geometry.height;
  frame.n = window.n;
  frame.counts.assign(static_cast<std::size_t>(geometry.width) * geometry.height, 0);
  for (const DvsEvent& e : window.events) {
    if (e.x >= geometry.width || e.y >= geometry.height)
      raise(Errc::coordinate_out_of_range,
            "event at (" + std::to_string(e.x) + "," + std::to_string(e.y) + ") outside " +
                std::to_string(geometry.width) + "x" + std::to_string(geometry.height));
    ++frame.counts[static_cast<std::size_t>(e.y) * geometry.width + e.x];
  }
  return frame;
}

void minmax_normalize(EventFrame& frame) {
  frame.gray.assign(frame.counts.size(), 0.0);
  if (frame.counts.empty()) return;
  auto [lo_it, hi_it] = std::minmax_element(frame.counts.begin(), frame.counts.end());
  const std::uint32_t lo = *lo_it, hi = *hi_it;
  if (hi == lo) return;  // uniform frame carries no spatial information
  const double scale = 1.0 / static_cast<double>(hi - lo);
  for (std::size_t i = 0; i < frame.counts.size(); ++i)
    frame.gray[i] = static_cast<double>(frame.counts[i] - lo) * scale;
}

std::pair<int, int> hand_center(const EventFrame& frame) {
  double m00 = 0.0, m10 = 0.0, m01 = 0.0;
  for (int y = 0; y < frame.height; ++y) {
    const std::uint32_t* row = frame.counts.data() + static_cast<std::size_t>(y) * frame.width;
    for (int x = 0; x < frame.width; ++x) {
      const double c = row[x];
      m00 += c;
      m10 += c * x;
      m01 += c * y;
    }
  }
  if (m00 == 0.0)
    raise(Errc::empty_frame, "window " + std::to_string(frame.n) + " has no events to localize");
  return {static_cast<int>(std::lround(m10 / m00)), static_cast<int>(std::lround(m01 / m00))};
}

Patch extract_patch(std::span<const double> gray, int width, int height, int cx, int cy,
                    int side) {
  if (side > width || side > height)
    raise(Errc::patch_larger_than_frame, std::to_string(side) + "-pixel patch does not fit a " +
                                             std::to_string(width) + "x" + std::to_string(height) +
                                             " frame");
  // Clamp the top-left corner so the window stays in bounds.
  int x0 = std::clamp(cx - side / 2, 0, width - side);
  int y0 = std::clamp(cy - side / 2, 0, height - side);
  Patch patch;
  patch.side = side;
  patch.cx = x0 + side / 2;
  patch.cy = y0 + side / 2;
  patch.pixels.resize(static_cast<std::size_t>(side) * side);
  for (int r = 0; r < side; ++r) {
    const double* src = gray.data() + static_cast<std::size_t>(y0 + r) * width + x0;
    std::copy(src, src + side, patch.pixels.data() + static_cast<std::size_t>(r) * side);
  }
  return patch;
}

Patch subsample(const Patch& patch) {
  if (patch.side <= 0 || patch.side % 2 != 0)
    raise(Errc::wrong_patch_size,
          "cannot 2x2-subsample a patch of side " + std::to_string(patch.side));
  Patch out;
  out.side = patch.side / 2;
  out.cx = patch.cx;
  out.cy = patch.cy;
  out.n = patch.n;
  out.pixels.resize(static_cast<std::size_t>(out.side) * out.side);
  for (int r = 0; r < out.side; ++r) {
    const double* top = patch.pixels.data() + static_cast<std::size_t>(2 * r) * patch.side;
    const double* bot = top + patch.side;
    for (int c = 0; c < out.side; ++c)
      out.pixels[static_cast<std::size_t>(r) * out.side + c] =
          0.25 * (top[2 * c] + top[2 * c + 1] + bot[2 * c] + bot[2 * c + 1]);
  }
  return out;
}

ApsFrame average_aps(const SyncWindow& window) {
  if (window.aps.empty())
    raise(Errc::no_aps_frames, "window " + std::to_string(window.n) + " has no APS frames");
  const ApsFrame& first = window.aps.front();
  ApsFrame mean;
  mean.width = first.width;
  mean.height = first.height;
  mean.t_us = first.t_us;
  mean.pixels.assign(first.pixels.size(), 0.0);
  for (const ApsFrame& f : window.aps) {
    if (f.width != mean.width || f.height != mean.height)
      raise(Errc::dimension_mismatch, "APS frames in window " + std::to_string(window.n) +
                                          " disagree on size (" + std::to_string(f.width) + "x" +
                                          std::to_string(f.height) + " vs " +
                                          std::to_string(mean.width) + "x" +
                                          std::to_string(mean.height) + ")");
    for (std::size_t i = 0; i < mean.pixels.size(); ++i) mean.pixels[i] += f.pixels[i];
  }
  const double inv = 1.0 / static_cast<double>(window.aps.size());
  for (double& v : mean.pixels) v *= inv;
  return mean;
}

HogDescriptor hog(const Patch& patch) {
  if (patch.side != kPatchSide)
    raise(Errc::wrong_patch_size, "HOG expects a " + std::to_string(kPatchSide) +
                                      "-pixel patch, got side " + std::to_string(patch.side));
  const int side = patch.side;
  const int cells = side / kHogCellSide;                     // 6
  const int blocks = cells - kHogBlockCells + 1;             // 5
  const int block_len = kHogBlockCells * kHogBlockCells * kHogBins;  // 36

  const auto pixel = [&](int x, int y) {
    x = std::clamp(x, 0, side - 1);  // replicate borders
    y = std::clamp(y, 0, side - 1);
    return patch.pixels[static_cast<std::size_t>(y) * side + x];
  };

  // Per-cell orientation histograms, hard-assigned by gradient angle.
  std::vector<double> cell_hist(static_cast<std::size_t>(cells) * cells * kHogBins, 0.0);
  constexpr double kRadToDeg = 180.0 / std::numbers::pi;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const double gx = pixel(x + 1, y) - pixel(x - 1, y);
      const double gy = pixel(x, y + 1) - pixel(x, y - 1);
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double deg = std::atan2(gy, gx) * kRadToDeg;  // (-180, 180]
      if (deg < 0.0) deg += 180.0;                  // fold to unsigned
      if (deg >= 180.0) deg -= 180.0;
      const int bin = std::min(static_cast<int>(deg / (180.0 / kHogBins)), kHogBins - 1);
      const std::size_t cell =
          static_cast<std::size_t>(y / kHogCellSide) * cells + (x / kHogCellSide);
      cell_hist[cell * kHogBins + bin] += mag;
    }
  }

  HogDescriptor desc;
  desc.n = patch.n;
  desc.values.resize(static_cast<std::size_t>(blocks) * blocks * block_len);
  std::size_t out = 0;
  for (int by = 0; by < blocks; ++by) {
    for (int bx = 0; bx < blocks; ++bx) {
      const std::size_t start = out;
      for (int dy = 0; dy < kHogBlockCells; ++dy) {
        for (int dx = 0; dx < kHogBlockCells; ++dx) {
          const std::size_t cell = static_cast<std::size_t>(by + dy) * cells + (bx + dx);
          for (int b = 0; b < kHogBins; ++b)
            desc.values[out++] = cell_hist[cell * kHogBins + b];
        }
      }
      double sq = 0.0;
      for (std::size_t i = start; i < out; ++i) sq += desc.values[i] * desc.values[i];
      const double inv_norm = 1.0 / std::sqrt(sq + kHogEpsilon);
      for (std::size_t i = start; i < out; ++i) desc.values[i] *= inv_norm;
    }
  }
  return desc;
}

namespace {

std::pair<int, int> center_or_fallback(const EventFrame& frame) {
  try {
    return hand_center(frame);
  } catch (const Error& e) {
    if (e.code() != Errc::empty_frame) throw;
    return {frame.width / 2, frame.height / 2};
  }
}

}  // namespace

Patch window_event_patch(const SyncWindow& window, const SensorGeometry& geometry) {
  EventFrame frame = accumulate_event_frame(window, geometry);
  minmax_normalize(frame);
  const auto [cx, cy] = center_or_fallback(frame);
  if (geometry.kind == SensorKind::dvs128) {
    Patch patch = extract_patch(frame.gray, frame.width, frame.height, cx, cy, kPatchSide);
    patch.n = window.n;
    return patch;
  }
  Patch wide = extract_patch(frame.gray, frame.width, frame.height, cx, cy, kDavisPatchSide);
  wide.n = window.n;
  return subsample(wide);
}

Patch window_aps_patch(const SyncWindow& window, const SensorGeometry& geometry) {
  const ApsFrame mean = average_aps(window);
  // The hand is localized on the event frame of the same window; the crop is
  // then taken from the averaged intensity image.
  const EventFrame frame = accumulate_event_frame(window, geometry);
  const auto [cx, cy] = center_or_fallback(frame);
  Patch wide = extract_patch(mean.pixels, mean.width, mean.height, cx, cy, kDavisPatchSide);
  wide.n = window.n;
  return subsample(wide);
}

}  // namespace gestfuse
