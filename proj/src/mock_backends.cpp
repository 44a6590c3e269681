#include "posekit/mock_backends.hpp"

#include <chrono>

namespace posekit {

GtReplayDetector::GtReplayDetector(const Dataset& d, double score) {
  for (const auto& ann : d.annotations) {
    Box b = ann.bbox;
    b.score = score;
    boxes_by_image_[ann.image_id].push_back(b);
  }
  for (const auto& img : d.images) {
    boxes_by_image_[img.id];  // frames without annotations yield no boxes
  }
}

std::vector<Box> GtReplayDetector::detect(const ImageU8&, int64_t frame_id) {
  const auto it = boxes_by_image_.find(frame_id);
  if (it == boxes_by_image_.end()) {
    return {};
  }
  return it->second;
}

GtReplayPose::GtReplayPose(const Dataset& d, const CodecConfig& cfg) : cfg_(cfg) {
  for (const auto& ann : d.annotations) {
    if (ann.keypoints) {
      anns_by_image_[ann.image_id].push_back(ann);
    }
  }
}

HeatmapStack GtReplayPose::estimate(const ImageU8&, const PatchContext& ctx) {
  const auto it = anns_by_image_.find(ctx.frame_id);
  if (it == anns_by_image_.end()) {
    return HeatmapStack(kNumKeypoints, cfg_.heatmap_height(), cfg_.heatmap_width(),
                        cfg_.stride);
  }
  const AnnRecord* best = nullptr;
  double best_iou = -1.0;
  for (const auto& ann : it->second) {
    const double overlap = iou(ann.bbox, ctx.detection);
    if (overlap > best_iou) {
      best_iou = overlap;
      best = &ann;
    }
  }
  if (!best) {
    return HeatmapStack(kNumKeypoints, cfg_.heatmap_height(), cfg_.heatmap_width(),
                        cfg_.stride);
  }
  KeypointSet in_patch = *best->keypoints;
  for (auto& p : in_patch.points) {
    const Point mapped = image_to_patch(ctx.transform, {p.x, p.y});
    p.x = mapped.x;
    p.y = mapped.y;
  }
  return encode(in_patch, cfg_);
}

KeypointSet FixedPose::default_layout(int patch_width, int patch_height) {
  KeypointSet kps;
  // 17 points on a coarse grid over the middle of the patch.
  for (int i = 0; i < kNumKeypoints; ++i) {
    const int col = i % 4;
    const int row = i / 4;
    kps.points[i].x = patch_width * (0.25 + 0.16 * col);
    kps.points[i].y = patch_height * (0.2 + 0.13 * row);
    kps.points[i].v = 2;
  }
  return kps;
}

void spin_for_ms(double ms) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto target = std::chrono::duration<double, std::milli>(ms);
  while (std::chrono::steady_clock::now() - t0 < target) {
  }
}

}  // namespace posekit
