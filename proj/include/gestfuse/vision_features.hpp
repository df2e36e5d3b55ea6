#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gestfuse/types.hpp"

namespace gestfuse {

inline constexpr int kPatchSide = 60;        // classifier input side
inline constexpr int kDavisPatchSide = 120;  // pre-subsampling side on 240x180 sources

// HOG parameterization (fixed): 10x10-pixel cells, 9 unsigned orientation
// bins over [0,180), 2x2-cell blocks at stride 1 cell, per-block L2
// normalization v / sqrt(|v|^2 + eps). A 60x60 patch gives a 6x6 cell grid,
// 5x5 blocks, and a 5*5*2*2*9 = 900-dim descriptor.
inline constexpr int kHogCellSide = 10;
inline constexpr int kHogBins = 9;
inline constexpr int kHogBlockCells = 2;
inline constexpr double kHogEpsilon = 1e-6;
inline constexpr std::size_t kHogLength = 900;

// Per-window event-count image plus its min-max normalized grayscale view.
struct EventFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> counts;  // row-major, counts[y*width + x]
  std::vector<double> gray;           // filled by minmax_normalize, values in [0,1]
  std::size_t n = 0;                  // source window index
};

// Square grayscale crop around the detected hand, values in [0,1].
struct Patch {
  int side = 0;
  std::vector<double> pixels;  // row-major, side*side
  int cx = 0;                  // center actually used, in source-frame coordinates
  int cy = 0;
  std::size_t n = 0;
};

struct HogDescriptor {
  std::vector<double> values;
  std::size_t n = 0;
};

// Counts events per pixel, ignoring polarity. An empty window yields an
// all-zero frame.
EventFrame accumulate_event_frame(const SyncWindow& window, const SensorGeometry& geometry);

// Fills frame.gray with (counts - min)/(max - min); all zeros when max == min.
void minmax_normalize(EventFrame& frame);

// Count centroid (M10/M00, M01/M00) rounded to the nearest pixel.
// Raises EmptyFrame when every count is zero; callers that need a total
// function should fall back to the frame center (width/2, height/2).
std::pair<int, int> hand_center(const EventFrame& frame);

// Copies a side x side window centered at (cx, cy), translated just enough
// to lie fully inside the frame. Raises PatchLargerThanFrame if it cannot fit.
Patch extract_patch(std::span<const double> gray, int width, int height, int cx, int cy,
                    int side);

// 2x2 mean pooling; the input side must be even (raises WrongPatchSize).
Patch subsample(const Patch& patch);

// Per-pixel arithmetic mean of every APS frame in the window.
// Raises NoApsFrames on an empty list, DimensionMismatch on ragged sizes.
ApsFrame average_aps(const SyncWindow& window);

// Descriptor for a 60x60 patch under the fixed parameterization above.
// Gradients are central differences with replicated borders; blocks are
// emitted row-major, cells row-major within a block, bins innermost.
HogDescriptor hog(const Patch& patch);

// Full event path for one window: accumulate, normalize, localize (falling
// back to the frame center when the window is empty), then crop 60x60 for
// DVS128 or 120x120 + 2x2 subsample for DAVIS240.
Patch window_event_patch(const SyncWindow& window, const SensorGeometry& geometry);

// Full APS path: average the window's frames, localize the hand on the
// *event* frame of the same window, crop 120x120 from the average, subsample.
Patch window_aps_patch(const SyncWindow& window, const SensorGeometry& geometry);

}  // namespace gestfuse
