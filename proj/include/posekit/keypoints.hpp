#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace posekit {

inline constexpr int kNumKeypoints = 17;

// COCO keypoint order: nose, eyes, ears, shoulders, elbows, wrists, hips,
// knees, ankles.
inline constexpr std::array<std::string_view, kNumKeypoints> kKeypointNames = {
    "nose",           "left_eye",      "right_eye",     "left_ear",
    "right_ear",      "left_shoulder", "right_shoulder", "left_elbow",
    "right_elbow",    "left_wrist",    "right_wrist",   "left_hip",
    "right_hip",      "left_knee",     "right_knee",    "left_ankle",
    "right_ankle"};

// Standard COCO per-keypoint sigmas; OKS tolerances default to twice these.
inline constexpr std::array<double, kNumKeypoints> kCocoSigmas = {
    0.026, 0.025, 0.025, 0.035, 0.035, 0.079, 0.079, 0.072, 0.072,
    0.062, 0.062, 0.107, 0.107, 0.087, 0.087, 0.089, 0.089};

// Facial keypoints = nose + eyes + ears; the rest are body keypoints.
inline constexpr int kNumFacialKeypoints = 5;
inline constexpr bool is_facial_keypoint(int i) { return i < kNumFacialKeypoints; }

// Limb connectivity, pairs of keypoint indices.
inline constexpr std::array<std::array<int, 2>, 19> kSkeleton = {{
    {15, 13}, {13, 11}, {16, 14}, {14, 12}, {11, 12}, {5, 11}, {6, 12},
    {5, 6},   {5, 7},   {6, 8},   {7, 9},   {8, 10},  {1, 2},  {0, 1},
    {0, 2},   {1, 3},   {2, 4},   {3, 5},   {4, 6},
}};

// Visibility: 0 = unlabeled, 1 = labeled but occluded, 2 = labeled visible.
struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  int v = 0;
};

struct KeypointSet {
  std::array<Keypoint, kNumKeypoints> points{};
  // Per-point confidence in [0,1]; all zeros when not populated.
  std::array<double, kNumKeypoints> confidences{};

  int visible_count() const {
    int n = 0;
    for (const auto& p : points) {
      if (p.v > 0) ++n;
    }
    return n;
  }
};

}  // namespace posekit
