#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "posekit/pipeline.hpp"

namespace posekit {

// Length-prefixed binary framing over a child process's stdin/stdout.
// Every message is [u32 payload length][payload], all integers and floats
// little-endian.
//
// Request payload (both backend kinds):
//   u32 width, u32 height, u32 channels, then width*height*channels bytes
//   of interleaved row-major pixels.
// Detector response payload:
//   u32 count, then count * 5 float32: x, y, w, h, score.
// Pose response payload:
//   u32 channels, u32 height, u32 width, u32 stride, then
//   channels*height*width float32 heatmap cells.
class ExternalProcess {
 public:
  explicit ExternalProcess(const std::string& command);
  ~ExternalProcess();
  ExternalProcess(const ExternalProcess&) = delete;
  ExternalProcess& operator=(const ExternalProcess&) = delete;

  std::vector<uint8_t> roundtrip(const std::vector<uint8_t>& payload);

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
};

std::vector<uint8_t> encode_image_payload(const ImageU8& image);

class ExternalDetector : public DetectorBackend {
 public:
  explicit ExternalDetector(const std::string& command, int input_long_side = 1280);
  std::vector<Box> detect(const ImageU8& image, int64_t frame_id) override;
  int input_long_side() const override { return input_long_side_; }
  bool wants_letterbox() const override { return true; }

 private:
  ExternalProcess process_;
  int input_long_side_;
};

class ExternalPose : public PoseBackend {
 public:
  explicit ExternalPose(const std::string& command);
  HeatmapStack estimate(const ImageU8& patch, const PatchContext& ctx) override;

 private:
  ExternalProcess process_;
};

}  // namespace posekit
