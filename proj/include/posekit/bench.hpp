#pragma once

#include <functional>
#include <string>
#include <vector>

#include "posekit/pipeline.hpp"

namespace posekit {

struct StageTiming {
  std::string name;
  std::vector<double> samples_ms;  // warmup iterations excluded
  int warmup_count = 0;
};

struct StageStats {
  std::string name;
  size_t count = 0;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
  // Quality flag: max/min ratio above 10 suggests the process was preempted.
  bool jitter_flagged = false;
};

struct LatencyReport {
  std::vector<StageStats> stages;
  double total_ms = 0.0;  // sum of stage means
  double fps_budget = 25.0;
  double headroom_ms = 0.0;  // 1000 / fps_budget - total_ms
};

// Runs `warmup` untimed then `iterations` timed calls on a monotonic clock.
// If the stage throws, the partial timing is attached to the rethrown error
// message after the completed-sample count.
StageTiming time_stage(const std::string& name, const std::function<void()>& stage,
                       int iterations, int warmup);

// mean/median/min/max plus nearest-rank p95. Empty samples report 0 with
// count 0.
StageStats stage_stats(const StageTiming& timing);

LatencyReport compose_report(const std::vector<StageTiming>& stages, double fps_budget);

std::string latency_report_to_json(const LatencyReport& report);

// Table in the shape of the paper-style latency columns: one row per stage,
// milliseconds with 2 decimals.
std::string format_latency_table(const LatencyReport& report);

struct BenchOptions {
  RunOptions run;
  int warmup_frames = 10;
  double fps_budget = 25.0;
};

// Runs the pipeline frame by frame and decomposes it into the preprocess /
// detect / crop+decode / pose stages. Frames with no detections contribute
// no pose sample. Throws IoError carrying the failing stage if a frame
// errors out.
LatencyReport bench_pipeline(const std::vector<Frame>& frames, DetectorBackend& detector,
                             PoseBackend& pose, const BenchOptions& opts);

}  // namespace posekit
