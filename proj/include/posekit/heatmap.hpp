#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "posekit/geometry.hpp"
#include "posekit/keypoints.hpp"

namespace posekit {

inline constexpr int kHeatmapStride = 4;

// One confidence map per keypoint at 1/stride patch resolution.
// Cell (row, col) of a channel corresponds to patch point
// (col * stride, row * stride); encode and decode share this convention.
// Values are kept at double precision in memory; the wire format carries
// float32.
struct HeatmapStack {
  int channels = kNumKeypoints;
  int height = kPatchHeight / kHeatmapStride;  // 64
  int width = kPatchWidth / kHeatmapStride;    // 48
  int stride = kHeatmapStride;
  std::vector<double> data;  // channels * height * width, row-major

  HeatmapStack() { data.resize(static_cast<size_t>(channels) * height * width, 0.0); }
  HeatmapStack(int c, int h, int w, int s) : channels(c), height(h), width(w), stride(s) {
    data.resize(static_cast<size_t>(c) * h * w, 0.0);
  }

  double at(int c, int row, int col) const {
    return data[(static_cast<size_t>(c) * height + row) * width + col];
  }
  double& at(int c, int row, int col) {
    return data[(static_cast<size_t>(c) * height + row) * width + col];
  }
};

struct CodecConfig {
  double sigma = 2.0;            // Gaussian std of encoded targets, in cells
  int peak_window = 1;           // NMS window radius, in cells
  double kp_conf_threshold = 0.4;
  bool subpixel_refine = true;
  int patch_width = kPatchWidth;
  int patch_height = kPatchHeight;
  int stride = kHeatmapStride;

  int heatmap_width() const { return patch_width / stride; }
  int heatmap_height() const { return patch_height / stride; }
};

// Gaussian targets for visible keypoints in patch coordinates; channels for
// v = 0 keypoints stay all-zero. Channel values are exp(-((x-ux)^2 +
// (y-uy)^2) / (2 sigma^2)) evaluated on the integer cell grid with
// u = keypoint / stride.
HeatmapStack encode(const KeypointSet& kps, const CodecConfig& cfg);

// Mean squared difference over the masked channels and all their cells.
// All channels masked out yields 0. Throws ContractError on shape mismatch.
double mse_loss(const HeatmapStack& pred, const HeatmapStack& gt,
                const std::array<bool, kNumKeypoints>& vis_mask);

// Peak extraction: per channel, the highest local maximum within
// cfg.peak_window survives NMS; optional quarter-cell shift toward the
// larger neighbor; cell coordinates scaled by stride and mapped through
// patch_to_image. Confidence equals the channel maximum; points below
// cfg.kp_conf_threshold keep their coordinates but get v = 0.
KeypointSet decode(const HeatmapStack& hm, const PatchTransform& t, const CodecConfig& cfg);

// Wire format: 4 little-endian uint32 (channels, height, width, stride)
// followed by channels*height*width little-endian float32.
std::vector<uint8_t> serialize_heatmap(const HeatmapStack& hm);
HeatmapStack deserialize_heatmap(const uint8_t* bytes, size_t size);

}  // namespace posekit
