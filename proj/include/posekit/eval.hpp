#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "posekit/dataset.hpp"
#include "posekit/geometry.hpp"
#include "posekit/keypoints.hpp"

namespace posekit {

struct Detection {
  int64_t image_id = 0;
  Box box;  // score carried on the box
  std::optional<KeypointSet> keypoints;
  int64_t category_id = 1;
};

struct AreaRange {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
};

struct EvalConfig {
  std::vector<double> iou_thresholds;
  std::vector<double> oks_thresholds;
  int recall_points = 101;
  int max_dets = 100;
  std::vector<AreaRange> area_ranges;
  std::array<double, kNumKeypoints> kp_k{};

  static EvalConfig defaults();
};

// All metrics live in [0,1]; nullopt marks not-applicable (no ground truth
// in the metric's scope). Display code multiplies by 100.
struct EvalReport {
  std::optional<double> ap;
  std::optional<double> ar_at_100;
  std::vector<std::pair<double, std::optional<double>>> ap_by_threshold;
  std::vector<std::pair<std::string, std::optional<double>>> ap_by_area;
  std::array<std::optional<double>, kNumKeypoints> per_keypoint_oks_mean{};
  std::optional<double> facial_oks_mean;
  std::optional<double> body_oks_mean;
  int64_t n_images = 0;
  int64_t n_gts = 0;
  int64_t n_dets = 0;
};

// Keypoint agreement normalized by object scale (s^2 = gt area) and the
// per-keypoint tolerance cfg.kp_k: mean over gt-visible keypoints of
// exp(-d^2 / (2 s^2 k^2)). Throws ContractError when no gt keypoint is
// visible (such ground truths are skipped during matching instead).
double oks(const AnnRecord& gt, const KeypointSet& pred, const EvalConfig& cfg);

enum class Similarity { kIou, kOks };

struct MatchEntry {
  int det_index = 0;  // into the caller's detection list
  std::optional<int> gt_index;
  double similarity = 0.0;
  bool crowd = false;  // matched ground truth was a crowd region
};

// Greedy single-image matching: detections in descending-score order
// (stable), each taking the not-yet-matched ground truth of highest
// similarity >= threshold; similarity ties go to the lowest gt index.
// Crowd ground truths match repeatedly without being consumed; for IoU
// their similarity is intersection over detection area. Ground truths
// without visible keypoints never match in OKS mode.
std::vector<MatchEntry> match_and_score(const std::vector<AnnRecord>& gts,
                                        const std::vector<Detection>& dets,
                                        double threshold, Similarity similarity,
                                        const EvalConfig& cfg);

struct ScoredLabel {
  double score = 0.0;
  bool tp = false;
};

// 101-point interpolated AP: labels sorted by descending score (stable),
// precision made non-increasing from the right, averaged at the evenly
// spaced recall points. nullopt when n_gt is 0.
std::optional<double> average_precision(std::vector<ScoredLabel> labels, int64_t n_gt,
                                        int recall_points);

EvalReport evaluate_detections(const Dataset& d, const std::vector<Detection>& dets,
                               const EvalConfig& cfg);

EvalReport evaluate_keypoints(const Dataset& d, const std::vector<Detection>& dets,
                              const EvalConfig& cfg);

// Per-metric frame-weighted mean: sum(value * n) / sum(n), skipping reports
// where a metric is not applicable. Throws ContractError on an empty list
// or non-positive counts.
EvalReport weighted_average(const std::vector<std::pair<EvalReport, int64_t>>& reports);

// COCO results schema: array of {image_id, category_id, bbox, score} or
// {image_id, category_id, keypoints, score}. A missing bbox is derived from
// the keypoints' extent.
std::vector<Detection> load_detections(const std::string& path);

std::string report_to_json(const EvalReport& report);

// Fixed-width table, values x100 with 2 decimals; appends a weighted-average
// row when more than one (name, report, frames) row is given.
std::string format_report_table(
    const std::vector<std::tuple<std::string, EvalReport, int64_t>>& rows);

}  // namespace posekit
