#pragma once

#include <map>
#include <memory>

#include "posekit/dataset.hpp"
#include "posekit/pipeline.hpp"

namespace posekit {

// Replays a dataset's annotation boxes for the matching frame id.
class GtReplayDetector : public DetectorBackend {
 public:
  explicit GtReplayDetector(const Dataset& d, double score = 1.0);
  std::vector<Box> detect(const ImageU8& image, int64_t frame_id) override;

 private:
  std::map<int64_t, std::vector<Box>> boxes_by_image_;
};

// Same fixed boxes on every frame.
class ConstDetector : public DetectorBackend {
 public:
  explicit ConstDetector(std::vector<Box> boxes) : boxes_(std::move(boxes)) {}
  std::vector<Box> detect(const ImageU8&, int64_t) override { return boxes_; }

 private:
  std::vector<Box> boxes_;
};

// Emits encoded heatmaps for a dataset's keypoints: the annotation whose box
// best overlaps the patch's detection is mapped into patch coordinates and
// encoded with the run's codec config.
class GtReplayPose : public PoseBackend {
 public:
  GtReplayPose(const Dataset& d, const CodecConfig& cfg);
  HeatmapStack estimate(const ImageU8& patch, const PatchContext& ctx) override;

 private:
  std::map<int64_t, std::vector<AnnRecord>> anns_by_image_;
  CodecConfig cfg_;
};

// Emits the same encoded stack (17 keypoints in patch coordinates)
// regardless of the patch content. Encoded once up front so calibrated
// delay wrappers measure only the delay.
class FixedPose : public PoseBackend {
 public:
  FixedPose(const KeypointSet& patch_keypoints, const CodecConfig& cfg)
      : encoded_(encode(patch_keypoints, cfg)) {}
  HeatmapStack estimate(const ImageU8&, const PatchContext&) override { return encoded_; }

  // A default layout spreading keypoints over the central patch region.
  static KeypointSet default_layout(int patch_width = kPatchWidth,
                                    int patch_height = kPatchHeight);

 private:
  HeatmapStack encoded_;
};

// Busy-wait on the monotonic clock so short calibrated delays stay accurate.
void spin_for_ms(double ms);

class DelayedDetector : public DetectorBackend {
 public:
  DelayedDetector(std::shared_ptr<DetectorBackend> inner, double delay_ms)
      : inner_(std::move(inner)), delay_ms_(delay_ms) {}
  std::vector<Box> detect(const ImageU8& image, int64_t frame_id) override {
    spin_for_ms(delay_ms_);
    return inner_->detect(image, frame_id);
  }
  int input_long_side() const override { return inner_->input_long_side(); }
  bool wants_letterbox() const override { return inner_->wants_letterbox(); }

 private:
  std::shared_ptr<DetectorBackend> inner_;
  double delay_ms_;
};

class DelayedPose : public PoseBackend {
 public:
  DelayedPose(std::shared_ptr<PoseBackend> inner, double delay_ms)
      : inner_(std::move(inner)), delay_ms_(delay_ms) {}
  HeatmapStack estimate(const ImageU8& patch, const PatchContext& ctx) override {
    spin_for_ms(delay_ms_);
    return inner_->estimate(patch, ctx);
  }

 private:
  std::shared_ptr<PoseBackend> inner_;
  double delay_ms_;
};

}  // namespace posekit
