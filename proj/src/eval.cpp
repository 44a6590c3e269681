#include "posekit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "posekit/errors.hpp"

namespace posekit {

using Json = nlohmann::ordered_json;

EvalConfig EvalConfig::defaults() {
  EvalConfig cfg;
  for (int i = 0; i <= 9; ++i) {
    cfg.iou_thresholds.push_back((50 + 5 * i) / 100.0);
  }
  cfg.oks_thresholds = cfg.iou_thresholds;
  cfg.area_ranges = {{"all", 0.0, 1e10},
                     {"small", 0.0, 32.0 * 32.0},
                     {"medium", 32.0 * 32.0, 96.0 * 96.0},
                     {"large", 96.0 * 96.0, 1e10}};
  for (int i = 0; i < kNumKeypoints; ++i) {
    cfg.kp_k[i] = 2.0 * kCocoSigmas[i];
  }
  return cfg;
}

double oks(const AnnRecord& gt, const KeypointSet& pred, const EvalConfig& cfg) {
  if (!gt.keypoints) {
    throw ContractError("oks: ground truth carries no keypoints");
  }
  if (gt.area <= 0.0) {
    throw ContractError("oks: ground truth area must be positive");
  }
  const double s2 = gt.area;
  double sum = 0.0;
  int visible = 0;
  for (int i = 0; i < kNumKeypoints; ++i) {
    const Keypoint& g = gt.keypoints->points[i];
    if (g.v <= 0) {
      continue;
    }
    const double dx = pred.points[i].x - g.x;
    const double dy = pred.points[i].y - g.y;
    const double k = cfg.kp_k[i];
    sum += std::exp(-(dx * dx + dy * dy) / (2.0 * s2 * k * k));
    ++visible;
  }
  if (visible == 0) {
    throw ContractError("oks: ground truth has no visible keypoints");
  }
  return sum / visible;
}

namespace {

bool oks_candidate(const AnnRecord& gt) {
  return gt.keypoints && gt.keypoints->visible_count() > 0 && gt.area > 0.0;
}

double pair_similarity(const AnnRecord& gt, const Detection& det, Similarity kind,
                       const EvalConfig& cfg) {
  if (kind == Similarity::kIou) {
    if (gt.iscrowd) {
      // Crowd regions score by how much of the detection they cover.
      const double det_area = det.box.area();
      if (det_area <= 0.0) return 0.0;
      const double ix = std::max(
          0.0, std::min(gt.bbox.x2(), det.box.x2()) - std::max(gt.bbox.x, det.box.x));
      const double iy = std::max(
          0.0, std::min(gt.bbox.y2(), det.box.y2()) - std::max(gt.bbox.y, det.box.y));
      return ix * iy / det_area;
    }
    return iou(gt.bbox, det.box);
  }
  if (!det.keypoints || !oks_candidate(gt)) {
    return 0.0;
  }
  return oks(gt, *det.keypoints, cfg);
}

}  // namespace

std::vector<MatchEntry> match_and_score(const std::vector<AnnRecord>& gts,
                                        const std::vector<Detection>& dets,
                                        double threshold, Similarity similarity,
                                        const EvalConfig& cfg) {
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return dets[a].box.score.value_or(0.0) > dets[b].box.score.value_or(0.0);
  });

  std::vector<bool> gt_taken(gts.size(), false);
  std::vector<MatchEntry> out;
  out.reserve(dets.size());
  for (int det_idx : order) {
    MatchEntry entry;
    entry.det_index = det_idx;
    double best = 0.0;
    int best_gt = -1;
    for (int g = 0; g < static_cast<int>(gts.size()); ++g) {
      if (gt_taken[g] && !gts[g].iscrowd) {
        continue;
      }
      if (similarity == Similarity::kOks && !oks_candidate(gts[g])) {
        continue;
      }
      const double sim = pair_similarity(gts[g], dets[det_idx], similarity, cfg);
      if (sim < threshold) {
        continue;
      }
      if (best_gt == -1 || sim > best) {
        best = sim;
        best_gt = g;
      }
    }
    if (best_gt >= 0) {
      entry.gt_index = best_gt;
      entry.similarity = best;
      entry.crowd = gts[best_gt].iscrowd;
      if (!gts[best_gt].iscrowd) {
        gt_taken[best_gt] = true;
      }
    }
    out.push_back(entry);
  }
  return out;
}

std::optional<double> average_precision(std::vector<ScoredLabel> labels, int64_t n_gt,
                                        int recall_points) {
  if (n_gt <= 0) {
    return std::nullopt;
  }
  if (recall_points < 2) {
    throw ContractError("average_precision: need at least 2 recall points");
  }
  std::stable_sort(labels.begin(), labels.end(),
                   [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });

  const size_t n = labels.size();
  std::vector<double> recall(n), precision(n);
  int64_t tp = 0;
  for (size_t i = 0; i < n; ++i) {
    if (labels[i].tp) ++tp;
    recall[i] = static_cast<double>(tp) / static_cast<double>(n_gt);
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  for (size_t i = n; i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }

  double sum = 0.0;
  for (int r = 0; r < recall_points; ++r) {
    const double target = static_cast<double>(r) / (recall_points - 1);
    const auto it = std::lower_bound(recall.begin(), recall.end(), target);
    if (it != recall.end()) {
      sum += precision[static_cast<size_t>(it - recall.begin())];
    }
  }
  return sum / recall_points;
}

namespace {

struct ImageBucket {
  std::vector<AnnRecord> gts;
  std::vector<Detection> dets;  // sorted by score desc, truncated to max_dets
};

struct DetLabel {
  double score = 0.0;
  int64_t image_id = 0;
  int det_index = 0;
  bool tp = false;
  bool ignored = false;
};

std::optional<double> mean_of_present(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  int n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

EvalReport evaluate_impl(const Dataset& d, const std::vector<Detection>& dets,
                         const EvalConfig& cfg, Similarity similarity) {
  const std::vector<double>& thresholds =
      similarity == Similarity::kIou ? cfg.iou_thresholds : cfg.oks_thresholds;
  if (thresholds.empty() || cfg.area_ranges.empty()) {
    throw ContractError("evaluate: thresholds and area ranges must be nonempty");
  }
  for (size_t i = 1; i < thresholds.size(); ++i) {
    if (thresholds[i] <= thresholds[i - 1]) {
      throw ContractError("evaluate: thresholds must be strictly increasing");
    }
  }

  std::unordered_set<int64_t> image_ids;
  for (const auto& img : d.images) {
    image_ids.insert(img.id);
  }
  for (const auto& det : dets) {
    if (!image_ids.count(det.image_id)) {
      throw ContractError("evaluate: detection references unknown image id " +
                          std::to_string(det.image_id));
    }
  }

  // Group by image; detections score-sorted and truncated to max_dets.
  std::map<int64_t, ImageBucket> buckets;
  for (const auto& img : d.images) {
    buckets[img.id];
  }
  for (const auto& gt : d.annotations) {
    buckets[gt.image_id].gts.push_back(gt);
  }
  for (const auto& det : dets) {
    buckets[det.image_id].dets.push_back(det);
  }
  for (auto& [id, bucket] : buckets) {
    std::stable_sort(bucket.dets.begin(), bucket.dets.end(),
                     [](const Detection& a, const Detection& b) {
                       return a.box.score.value_or(0.0) > b.box.score.value_or(0.0);
                     });
    if (static_cast<int>(bucket.dets.size()) > cfg.max_dets) {
      bucket.dets.resize(cfg.max_dets);
    }
  }

  // A ground truth is usable when it can be a true-positive anchor at all.
  const auto gt_always_ignored = [&](const AnnRecord& gt) {
    if (gt.iscrowd) return true;
    if (similarity == Similarity::kOks && !oks_candidate(gt)) return true;
    return false;
  };
  const auto gt_in_range = [](const AnnRecord& gt, const AreaRange& r) {
    return gt.area >= r.lo && gt.area <= r.hi;
  };

  const size_t n_thr = thresholds.size();
  const size_t n_rng = cfg.area_ranges.size();

  // ap_value[t][r], final_recall[t] for range 0.
  std::vector<std::vector<std::optional<double>>> ap_value(
      n_thr, std::vector<std::optional<double>>(n_rng));
  std::vector<std::optional<double>> recall_value(n_thr);

  // Matching depends only on the threshold; ignore flags only on the range.
  for (size_t t = 0; t < n_thr; ++t) {
    std::vector<std::vector<MatchEntry>> matches_per_image;
    std::vector<const ImageBucket*> bucket_ptrs;
    matches_per_image.reserve(buckets.size());
    for (const auto& [id, bucket] : buckets) {
      matches_per_image.push_back(
          match_and_score(bucket.gts, bucket.dets, thresholds[t], similarity, cfg));
      bucket_ptrs.push_back(&bucket);
    }

    for (size_t r = 0; r < n_rng; ++r) {
      const AreaRange& range = cfg.area_ranges[r];
      int64_t n_gt = 0;
      std::vector<DetLabel> labels;
      size_t bi = 0;
      for (const auto& [image_id, bucket] : buckets) {
        for (const auto& gt : bucket.gts) {
          if (!gt_always_ignored(gt) && gt_in_range(gt, range)) {
            ++n_gt;
          }
        }
        for (const MatchEntry& m : matches_per_image[bi]) {
          const Detection& det = bucket.dets[m.det_index];
          DetLabel label;
          label.score = det.box.score.value_or(0.0);
          label.image_id = image_id;
          label.det_index = m.det_index;
          if (m.gt_index) {
            const AnnRecord& gt = bucket.gts[*m.gt_index];
            if (gt_always_ignored(gt) || !gt_in_range(gt, range)) {
              label.ignored = true;
            } else {
              label.tp = true;
            }
          } else {
            const double det_area = det.box.area();
            if (det_area < range.lo || det_area > range.hi) {
              label.ignored = true;
            }
          }
          labels.push_back(label);
        }
        ++bi;
      }

      std::sort(labels.begin(), labels.end(), [](const DetLabel& a, const DetLabel& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.image_id != b.image_id) return a.image_id < b.image_id;
        return a.det_index < b.det_index;
      });

      std::vector<ScoredLabel> scored;
      int64_t tp_total = 0;
      for (const DetLabel& l : labels) {
        if (l.ignored) continue;
        scored.push_back({l.score, l.tp});
        if (l.tp) ++tp_total;
      }
      ap_value[t][r] = average_precision(scored, n_gt, cfg.recall_points);
      if (r == 0 && n_gt > 0) {
        recall_value[t] = static_cast<double>(tp_total) / static_cast<double>(n_gt);
      }
    }
  }

  EvalReport report;
  std::vector<std::optional<double>> headline;
  for (size_t t = 0; t < n_thr; ++t) {
    headline.push_back(ap_value[t][0]);
    report.ap_by_threshold.emplace_back(thresholds[t], ap_value[t][0]);
  }
  report.ap = mean_of_present(headline);
  report.ar_at_100 = mean_of_present(recall_value);
  for (size_t r = 0; r < n_rng; ++r) {
    std::vector<std::optional<double>> per_thr;
    for (size_t t = 0; t < n_thr; ++t) {
      per_thr.push_back(ap_value[t][r]);
    }
    report.ap_by_area.emplace_back(cfg.area_ranges[r].name, mean_of_present(per_thr));
  }

  report.n_images = static_cast<int64_t>(d.images.size());
  report.n_gts = static_cast<int64_t>(d.annotations.size());
  report.n_dets = static_cast<int64_t>(dets.size());

  // Per-keypoint agreement over pairs matched at the loosest threshold.
  if (similarity == Similarity::kOks) {
    std::array<double, kNumKeypoints> sums{};
    std::array<int64_t, kNumKeypoints> counts{};
    for (const auto& [image_id, bucket] : buckets) {
      const auto matches =
          match_and_score(bucket.gts, bucket.dets, thresholds.front(), similarity, cfg);
      for (const MatchEntry& m : matches) {
        if (!m.gt_index) continue;
        const AnnRecord& gt = bucket.gts[*m.gt_index];
        if (gt_always_ignored(gt)) continue;
        const Detection& det = bucket.dets[m.det_index];
        if (!det.keypoints) continue;
        for (int i = 0; i < kNumKeypoints; ++i) {
          const Keypoint& g = gt.keypoints->points[i];
          if (g.v <= 0) continue;
          const double dx = det.keypoints->points[i].x - g.x;
          const double dy = det.keypoints->points[i].y - g.y;
          const double k = cfg.kp_k[i];
          sums[i] += std::exp(-(dx * dx + dy * dy) / (2.0 * gt.area * k * k));
          counts[i] += 1;
        }
      }
    }
    double facial_sum = 0.0, body_sum = 0.0;
    int facial_n = 0, body_n = 0;
    for (int i = 0; i < kNumKeypoints; ++i) {
      if (counts[i] > 0) {
        const double mean = sums[i] / static_cast<double>(counts[i]);
        report.per_keypoint_oks_mean[i] = mean;
        if (is_facial_keypoint(i)) {
          facial_sum += mean;
          ++facial_n;
        } else {
          body_sum += mean;
          ++body_n;
        }
      }
    }
    if (facial_n > 0) report.facial_oks_mean = facial_sum / facial_n;
    if (body_n > 0) report.body_oks_mean = body_sum / body_n;
  }

  return report;
}

}  // namespace

EvalReport evaluate_detections(const Dataset& d, const std::vector<Detection>& dets,
                               const EvalConfig& cfg) {
  return evaluate_impl(d, dets, cfg, Similarity::kIou);
}

EvalReport evaluate_keypoints(const Dataset& d, const std::vector<Detection>& dets,
                              const EvalConfig& cfg) {
  return evaluate_impl(d, dets, cfg, Similarity::kOks);
}

EvalReport weighted_average(const std::vector<std::pair<EvalReport, int64_t>>& reports) {
  if (reports.empty()) {
    throw ContractError("weighted_average: empty report list");
  }
  for (const auto& [report, n] : reports) {
    if (n <= 0) {
      throw ContractError("weighted_average: frame counts must be positive");
    }
  }

  const auto combine = [&](auto&& get) -> std::optional<double> {
    double num = 0.0;
    double den = 0.0;
    for (const auto& [report, n] : reports) {
      const std::optional<double> v = get(report);
      if (v) {
        num += *v * static_cast<double>(n);
        den += static_cast<double>(n);
      }
    }
    if (den == 0.0) return std::nullopt;
    return num / den;
  };

  EvalReport out;
  out.ap = combine([](const EvalReport& r) { return r.ap; });
  out.ar_at_100 = combine([](const EvalReport& r) { return r.ar_at_100; });
  out.facial_oks_mean = combine([](const EvalReport& r) { return r.facial_oks_mean; });
  out.body_oks_mean = combine([](const EvalReport& r) { return r.body_oks_mean; });

  const EvalReport& first = reports.front().first;
  for (size_t t = 0; t < first.ap_by_threshold.size(); ++t) {
    out.ap_by_threshold.emplace_back(
        first.ap_by_threshold[t].first, combine([&](const EvalReport& r) {
          return t < r.ap_by_threshold.size() ? r.ap_by_threshold[t].second : std::nullopt;
        }));
  }
  for (size_t a = 0; a < first.ap_by_area.size(); ++a) {
    out.ap_by_area.emplace_back(
        first.ap_by_area[a].first, combine([&](const EvalReport& r) {
          return a < r.ap_by_area.size() ? r.ap_by_area[a].second : std::nullopt;
        }));
  }
  for (int i = 0; i < kNumKeypoints; ++i) {
    out.per_keypoint_oks_mean[i] =
        combine([&](const EvalReport& r) { return r.per_keypoint_oks_mean[i]; });
  }
  for (const auto& [report, n] : reports) {
    out.n_images += report.n_images;
    out.n_gts += report.n_gts;
    out.n_dets += report.n_dets;
  }
  return out;
}

std::vector<Detection> load_detections(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open results file: " + path);
  }
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!doc.is_array()) {
    throw ValidationError(path + ": results document must be a JSON array");
  }

  std::vector<Detection> dets;
  dets.reserve(doc.size());
  for (const auto& j : doc) {
    Detection det;
    det.image_id = j.at("image_id").get<int64_t>();
    det.category_id = j.value("category_id", 1);
    const double score = j.at("score").get<double>();
    if (score < 0.0 || score > 1.0) {
      throw ValidationError(path + ": detection score " + std::to_string(score) +
                            " outside [0,1]");
    }
    if (j.contains("keypoints")) {
      const auto& arr = j.at("keypoints");
      if (!arr.is_array() || arr.size() != static_cast<size_t>(kNumKeypoints) * 3) {
        throw ValidationError(path + ": keypoints must be a flat array of 51 numbers");
      }
      KeypointSet kps;
      for (int i = 0; i < kNumKeypoints; ++i) {
        kps.points[i].x = arr[i * 3].get<double>();
        kps.points[i].y = arr[i * 3 + 1].get<double>();
        // In the results schema the third slot is the per-keypoint score.
        kps.confidences[i] = arr[i * 3 + 2].get<double>();
        kps.points[i].v = kps.confidences[i] > 0.0 ? 2 : 0;
      }
      det.keypoints = kps;
    }
    if (j.contains("bbox")) {
      const auto& bb = j.at("bbox");
      if (!bb.is_array() || bb.size() != 4) {
        throw ValidationError(path + ": bbox must be [x, y, w, h]");
      }
      det.box = {bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(),
                 bb[3].get<double>(), score};
    } else if (det.keypoints) {
      // Derive the box from the keypoint extent.
      double x0 = 1e30, y0 = 1e30, x1 = -1e30, y1 = -1e30;
      bool any = false;
      for (const auto& p : det.keypoints->points) {
        if (p.v <= 0) continue;
        x0 = std::min(x0, p.x);
        y0 = std::min(y0, p.y);
        x1 = std::max(x1, p.x);
        y1 = std::max(y1, p.y);
        any = true;
      }
      det.box = any ? Box{x0, y0, x1 - x0, y1 - y0, score} : Box{0, 0, 0, 0, score};
    } else {
      throw ValidationError(path + ": result entry needs bbox or keypoints");
    }
    dets.push_back(std::move(det));
  }
  return dets;
}

namespace {

Json optional_to_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  Json doc;
  doc["ap"] = optional_to_json(report.ap);
  doc["ar_at_100"] = optional_to_json(report.ar_at_100);
  Json by_thr = Json::array();
  for (const auto& [thr, ap] : report.ap_by_threshold) {
    by_thr.push_back({{"threshold", thr}, {"ap", optional_to_json(ap)}});
  }
  doc["ap_by_threshold"] = std::move(by_thr);
  Json by_area = Json::object();
  for (const auto& [name, ap] : report.ap_by_area) {
    by_area[name] = optional_to_json(ap);
  }
  doc["ap_by_area"] = std::move(by_area);
  bool any_kp = false;
  for (const auto& v : report.per_keypoint_oks_mean) {
    if (v) any_kp = true;
  }
  if (any_kp || report.facial_oks_mean || report.body_oks_mean) {
    Json per_kp = Json::object();
    for (int i = 0; i < kNumKeypoints; ++i) {
      per_kp[std::string(kKeypointNames[i])] = optional_to_json(report.per_keypoint_oks_mean[i]);
    }
    doc["per_keypoint_oks_mean"] = std::move(per_kp);
    doc["per_group_oks"] = {{"facial", optional_to_json(report.facial_oks_mean)},
                            {"body", optional_to_json(report.body_oks_mean)}};
  }
  doc["counts"] = {{"images", report.n_images},
                   {"gts", report.n_gts},
                   {"dets", report.n_dets}};
  return doc.dump(2) + "\n";
}

std::string format_report_table(
    const std::vector<std::tuple<std::string, EvalReport, int64_t>>& rows) {
  const auto cell = [](const std::optional<double>& v) {
    char buf[16];
    if (!v) {
      return std::string("    -");
    }
    std::snprintf(buf, sizeof(buf), "%5.2f", *v * 100.0);
    return std::string(buf);
  };

  std::ostringstream out;
  out << "Dataset                     AP     AR  AP_s   AP_m   AP_l  Images\n";
  out << "-----------------------------------------------------------------\n";
  const auto area_ap = [](const EvalReport& r, const std::string& name) {
    for (const auto& [n, v] : r.ap_by_area) {
      if (n == name) return v;
    }
    return std::optional<double>{};
  };
  const auto row_line = [&](const std::string& name, const EvalReport& r, int64_t images) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-24s %s  %s %s  %s  %s  %6lld\n", name.c_str(),
                  cell(r.ap).c_str(), cell(r.ar_at_100).c_str(),
                  cell(area_ap(r, "small")).c_str(), cell(area_ap(r, "medium")).c_str(),
                  cell(area_ap(r, "large")).c_str(), static_cast<long long>(images));
    out << buf;
  };
  for (const auto& [name, report, frames] : rows) {
    row_line(name, report, frames);
  }
  if (rows.size() > 1) {
    std::vector<std::pair<EvalReport, int64_t>> weighted;
    for (const auto& [name, report, frames] : rows) {
      weighted.emplace_back(report, frames);
    }
    const EvalReport avg = weighted_average(weighted);
    int64_t total = 0;
    for (const auto& [r, n] : weighted) total += n;
    out << "-----------------------------------------------------------------\n";
    row_line("Weighted Average", avg, total);
  }
  return out.str();
}

}  // namespace posekit
