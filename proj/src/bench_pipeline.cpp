#include "posekit/bench.hpp"
#include "posekit/errors.hpp"

namespace posekit {

LatencyReport bench_pipeline(const std::vector<Frame>& frames, DetectorBackend& detector,
                             PoseBackend& pose, const BenchOptions& opts) {
  if (frames.empty()) {
    throw ContractError("bench_pipeline: no frames given");
  }
  StageTiming preprocess{"preprocess", {}, opts.warmup_frames};
  StageTiming detect{"detect", {}, opts.warmup_frames};
  StageTiming crop_decode{"crop+decode", {}, opts.warmup_frames};
  StageTiming pose_stage{"pose", {}, opts.warmup_frames};

  int index = 0;
  for (const Frame& frame : frames) {
    const PoseResult result = run_frame(frame, detector, pose, opts.run);
    if (result.error) {
      throw IoError("bench_pipeline: frame " + std::to_string(frame.id) + " failed in stage '" +
                    result.error->stage + "': " + result.error->message);
    }
    if (index++ < opts.warmup_frames) {
      continue;
    }
    preprocess.samples_ms.push_back(result.timings.preprocess_ms);
    detect.samples_ms.push_back(result.timings.detect_ms);
    crop_decode.samples_ms.push_back(result.timings.crop_decode_ms);
    if (!result.persons.empty()) {
      pose_stage.samples_ms.push_back(result.timings.pose_ms);
    }
  }
  return compose_report({preprocess, detect, crop_decode, pose_stage}, opts.fps_budget);
}

}  // namespace posekit
