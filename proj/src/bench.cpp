#include "posekit/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "posekit/errors.hpp"

namespace posekit {

using Clock = std::chrono::steady_clock;

namespace {

double elapsed_ms(Clock::time_point t0, Clock::time_point t1) {
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

StageTiming time_stage(const std::string& name, const std::function<void()>& stage,
                       int iterations, int warmup) {
  if (iterations < 1) {
    throw ContractError("time_stage: iterations must be >= 1");
  }
  if (warmup < 0) {
    throw ContractError("time_stage: warmup must be >= 0");
  }
  StageTiming timing;
  timing.name = name;
  timing.warmup_count = warmup;
  timing.samples_ms.reserve(iterations);
  try {
    for (int i = 0; i < warmup; ++i) {
      stage();
    }
    for (int i = 0; i < iterations; ++i) {
      const auto t0 = Clock::now();
      stage();
      const auto t1 = Clock::now();
      timing.samples_ms.push_back(elapsed_ms(t0, t1));
    }
  } catch (const std::exception& e) {
    throw IoError("stage '" + name + "' failed after " +
                  std::to_string(timing.samples_ms.size()) + " completed samples: " + e.what());
  }
  return timing;
}

StageStats stage_stats(const StageTiming& timing) {
  StageStats stats;
  stats.name = timing.name;
  stats.count = timing.samples_ms.size();
  if (timing.samples_ms.empty()) {
    return stats;
  }
  std::vector<double> sorted = timing.samples_ms;
  std::sort(sorted.begin(), sorted.end());

  double sum = 0.0;
  for (double s : sorted) sum += s;
  stats.mean_ms = sum / static_cast<double>(sorted.size());

  const size_t n = sorted.size();
  stats.median_ms = n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
  // Nearest-rank percentile on the sorted list.
  const size_t rank = static_cast<size_t>(std::ceil(0.95 * static_cast<double>(n)));
  stats.p95_ms = sorted[std::max<size_t>(rank, 1) - 1];
  stats.min_ms = sorted.front();
  stats.max_ms = sorted.back();
  stats.jitter_flagged = stats.min_ms > 0.0 ? stats.max_ms / stats.min_ms > 10.0
                                            : stats.max_ms > 0.0;
  return stats;
}

LatencyReport compose_report(const std::vector<StageTiming>& stages, double fps_budget) {
  if (stages.empty()) {
    throw ContractError("compose_report: no stages given");
  }
  if (fps_budget <= 0.0) {
    throw ContractError("compose_report: fps budget must be positive");
  }
  LatencyReport report;
  report.fps_budget = fps_budget;
  for (const auto& timing : stages) {
    report.stages.push_back(stage_stats(timing));
    report.total_ms += report.stages.back().mean_ms;
  }
  report.headroom_ms = 1000.0 / fps_budget - report.total_ms;
  return report;
}

std::string latency_report_to_json(const LatencyReport& report) {
  nlohmann::ordered_json doc;
  doc["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : report.stages) {
    doc["stages"].push_back({{"name", s.name},
                             {"count", s.count},
                             {"mean_ms", s.mean_ms},
                             {"median_ms", s.median_ms},
                             {"p95_ms", s.p95_ms},
                             {"min_ms", s.min_ms},
                             {"max_ms", s.max_ms},
                             {"jitter_flagged", s.jitter_flagged}});
  }
  doc["total_ms"] = report.total_ms;
  doc["fps_budget"] = report.fps_budget;
  doc["headroom_ms"] = report.headroom_ms;
  return doc.dump(2) + "\n";
}

std::string format_latency_table(const LatencyReport& report) {
  std::ostringstream out;
  out << "Stage              Latency [ms]  Median     P95     Min     Max   N\n";
  out << "--------------------------------------------------------------------\n";
  for (const auto& s : report.stages) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-18s %12.2f %7.2f %7.2f %7.2f %7.2f %3zu%s\n",
                  s.name.c_str(), s.mean_ms, s.median_ms, s.p95_ms, s.min_ms, s.max_ms,
                  s.count, s.jitter_flagged ? "  [jitter]" : "");
    out << buf;
  }
  out << "--------------------------------------------------------------------\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-18s %12.2f\n", "Total", report.total_ms);
  out << buf;
  std::snprintf(buf, sizeof(buf), "Budget %.0f fps -> headroom %.2f ms per frame\n",
                report.fps_budget, report.headroom_ms);
  out << buf;
  return out.str();
}

}  // namespace posekit
