#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "posekit/geometry.hpp"
#include "posekit/heatmap.hpp"
#include "posekit/image.hpp"
#include "posekit/keypoints.hpp"

namespace posekit {

struct Frame {
  int64_t id = 0;
  std::string name;  // source tag, e.g. file stem; used to resolve image ids
  ImageU8 image;
  double timestamp_ms = 0.0;

  int width() const { return image.width; }
  int height() const { return image.height; }
};

// Person detector. Boxes are returned in the coordinate space of the image
// passed in; when wants_letterbox() is true the pipeline letterboxes frames
// to input_long_side() first (timed as the preprocess stage) and maps the
// boxes back. The frame id exists for replay mocks; external backends only
// ever see the pixels. Implementations must be deterministic for identical
// input.
class DetectorBackend {
 public:
  virtual ~DetectorBackend() = default;
  virtual std::vector<Box> detect(const ImageU8& image, int64_t frame_id) = 0;
  virtual int input_long_side() const { return 1280; }
  virtual bool wants_letterbox() const { return false; }
};

struct PatchContext {
  int64_t frame_id = 0;
  Box detection;  // original detection box in frame coordinates
  PatchTransform transform;
};

// Keypoint estimator over fixed-size patches. The context identifies the
// patch's origin for backends that need it (replay mocks); the external
// wire protocol only ever transmits the pixels.
class PoseBackend {
 public:
  virtual ~PoseBackend() = default;
  virtual HeatmapStack estimate(const ImageU8& patch, const PatchContext& ctx) = 0;
  virtual std::vector<HeatmapStack> estimate_batch(const std::vector<ImageU8>& patches,
                                                   const std::vector<PatchContext>& ctxs) {
    std::vector<HeatmapStack> out;
    out.reserve(patches.size());
    for (size_t i = 0; i < patches.size(); ++i) {
      out.push_back(estimate(patches[i], ctxs[i]));
    }
    return out;
  }
};

struct PersonPose {
  Box box;                // detection box with score
  KeypointSet keypoints;  // frame coordinates, confidences populated
  PatchTransform transform;
};

struct StageTimings {
  double preprocess_ms = 0.0;
  double detect_ms = 0.0;
  double crop_decode_ms = 0.0;
  double pose_ms = 0.0;
};

struct PipelineError {
  std::string stage;
  std::string message;
};

struct PoseResult {
  int64_t frame_id = 0;
  std::string frame_name;
  std::vector<PersonPose> persons;  // descending detection score
  StageTimings timings;
  std::optional<PipelineError> error;
};

struct RunOptions {
  double det_conf_threshold = 0.4;
  CodecConfig codec;
  double box_expansion = 1.0;
  bool pipelined = false;
  int pose_batch = 1;  // > 1 groups a frame's patches into backend batches
};

// Samples the frame under the inverse patch mapping with bilinear
// interpolation; regions outside the frame come out black.
ImageU8 crop_patch(const ImageU8& frame, const PatchTransform& t);

struct LetterboxMap {
  double scale = 1.0;
  double pad_x = 0.0;
  double pad_y = 0.0;
};

// Aspect-preserving resize onto a square long_side canvas with symmetric
// black padding.
ImageU8 letterbox(const ImageU8& image, int long_side, LetterboxMap& map);
Box unletterbox_box(const Box& b, const LetterboxMap& map);

// One frame through detect -> crop -> pose -> decode. Backend failures are
// captured as a per-frame error naming the stage; the frame still yields a
// result.
PoseResult run_frame(const Frame& frame, DetectorBackend& detector, PoseBackend& pose,
                     const RunOptions& opts);

class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::optional<Frame> next() = 0;
};

// Frames from the PPM files of a directory, sorted by file name. Frame ids
// are ordinal unless an id_by_name map (file stem or full name -> image id)
// is supplied.
class DirectoryFrameSource : public FrameSource {
 public:
  explicit DirectoryFrameSource(const std::string& dir);
  DirectoryFrameSource(const std::string& dir,
                       std::function<std::optional<int64_t>(const std::string&)> id_by_name);
  std::optional<Frame> next() override;

 private:
  std::vector<std::string> paths_;
  size_t index_ = 0;
  std::function<std::optional<int64_t>(const std::string&)> id_by_name_;
};

// Raw RGB24 frame stream of known dimensions, e.g. piped from an external
// video decoder.
class RawStreamFrameSource : public FrameSource {
 public:
  RawStreamFrameSource(const std::string& path, int width, int height);
  std::optional<Frame> next() override;

 private:
  std::shared_ptr<std::istream> stream_;
  int width_;
  int height_;
  int64_t index_ = 0;
};

class VectorFrameSource : public FrameSource {
 public:
  explicit VectorFrameSource(std::vector<Frame> frames) : frames_(std::move(frames)) {}
  std::optional<Frame> next() override {
    if (index_ >= frames_.size()) return std::nullopt;
    return frames_[index_++];
  }

 private:
  std::vector<Frame> frames_;
  size_t index_ = 0;
};

using ResultSink = std::function<void(const PoseResult&)>;

// Emits results in frame order. opts.pipelined overlaps the next frame's
// detection with the current frame's pose stage; with pure backends the
// results are identical to the sequential mode. Per-frame errors do not
// stop the stream.
void run_sequence(FrameSource& frames, DetectorBackend& detector, PoseBackend& pose,
                  const RunOptions& opts, const ResultSink& sink);

std::vector<PoseResult> run_sequence_collect(FrameSource& frames, DetectorBackend& detector,
                                             PoseBackend& pose, const RunOptions& opts);

// COCO keypoint results array (one entry per person; third keypoint slot is
// the per-point confidence). Deterministic byte output for fixed inputs.
std::string results_to_json(const std::vector<PoseResult>& results);

// Per-frame stage timing sidecar.
std::string timings_to_json(const std::vector<PoseResult>& results);

}  // namespace posekit
