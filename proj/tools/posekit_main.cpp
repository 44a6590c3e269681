// Command-line surface for the toolkit: dataset merging and stats, COCO
// detection/keypoint evaluation, pipeline runs with mock or external
// backends, overlay rendering and the per-stage latency benchmark.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "posekit/augment.hpp"
#include "posekit/bench.hpp"
#include "posekit/dataset.hpp"
#include "posekit/errors.hpp"
#include "posekit/eval.hpp"
#include "posekit/external_backend.hpp"
#include "posekit/mock_backends.hpp"
#include "posekit/overlay.hpp"
#include "posekit/pipeline.hpp"
#include "posekit/rng.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using namespace posekit;

namespace {

// Effective configuration: command-line flag > config file > built-in
// default. Only explicitly-set flags override file values.
struct Config {
  uint64_t seed = 0;
  double det_conf_threshold = 0.4;
  double kp_conf_threshold = 0.4;
  double nwd_c = 12.8;
  double sigma = 2.0;
  int peak_window = 1;
  bool no_refine = false;
  double box_expansion = 1.0;
  int max_dets = 100;
  double fps_budget = 25.0;
  int jobs = 2;
  std::vector<double> kp_k;  // empty = COCO defaults

  CodecConfig codec() const {
    CodecConfig cfg;
    cfg.sigma = sigma;
    cfg.peak_window = peak_window;
    cfg.kp_conf_threshold = kp_conf_threshold;
    cfg.subpixel_refine = !no_refine;
    return cfg;
  }

  Json to_json() const {
    Json doc{{"seed", seed},
             {"det_conf_threshold", det_conf_threshold},
             {"kp_conf_threshold", kp_conf_threshold},
             {"nwd_c", nwd_c},
             {"sigma", sigma},
             {"peak_window", peak_window},
             {"no_refine", no_refine},
             {"box_expansion", box_expansion},
             {"max_dets", max_dets},
             {"fps_budget", fps_budget},
             {"jobs", jobs}};
    doc["kp_k"] = kp_k.empty() ? Json("coco-defaults") : Json(kp_k);
    return doc;
  }
};

Config load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file: " + path);
  }
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  Config cfg;
  cfg.seed = doc.value("seed", cfg.seed);
  cfg.det_conf_threshold = doc.value("det_conf_threshold", cfg.det_conf_threshold);
  cfg.kp_conf_threshold = doc.value("kp_conf_threshold", cfg.kp_conf_threshold);
  cfg.nwd_c = doc.value("nwd_c", cfg.nwd_c);
  cfg.sigma = doc.value("sigma", cfg.sigma);
  cfg.peak_window = doc.value("peak_window", cfg.peak_window);
  cfg.no_refine = doc.value("no_refine", cfg.no_refine);
  cfg.box_expansion = doc.value("box_expansion", cfg.box_expansion);
  cfg.max_dets = doc.value("max_dets", cfg.max_dets);
  cfg.fps_budget = doc.value("fps_budget", cfg.fps_budget);
  cfg.jobs = doc.value("jobs", cfg.jobs);
  if (doc.contains("kp_k")) {
    cfg.kp_k = doc.at("kp_k").get<std::vector<double>>();
  }
  return cfg;
}

void validate_config(const Config& cfg) {
  if (cfg.nwd_c <= 0) throw ValidationError("nwd_c must be positive");
  if (cfg.sigma <= 0) throw ValidationError("sigma must be positive");
  if (cfg.peak_window < 1) throw ValidationError("peak_window must be >= 1");
  if (cfg.kp_conf_threshold < 0 || cfg.kp_conf_threshold > 1) {
    throw ValidationError("kp_conf_threshold must lie in [0,1]");
  }
  if (cfg.det_conf_threshold < 0 || cfg.det_conf_threshold > 1) {
    throw ValidationError("det_conf_threshold must lie in [0,1]");
  }
  if (cfg.box_expansion <= 0) throw ValidationError("box_expansion must be positive");
  if (cfg.max_dets < 1) throw ValidationError("max_dets must be >= 1");
  if (cfg.fps_budget <= 0) throw ValidationError("fps_budget must be positive");
  if (cfg.jobs < 1) throw ValidationError("jobs must be >= 1");
  if (!cfg.kp_k.empty()) {
    if (cfg.kp_k.size() != static_cast<size_t>(kNumKeypoints)) {
      throw ValidationError("kp-k needs exactly 17 values");
    }
    for (double k : cfg.kp_k) {
      if (k <= 0) throw ValidationError("kp-k values must be positive");
    }
  }
}

void register_config_options(CLI::App* cmd, Config& cfg) {
  cmd->add_option("--seed", cfg.seed, "global random seed");
  cmd->add_option("--det-threshold", cfg.det_conf_threshold,
                  "drop detections scoring below this");
  cmd->add_option("--kp-threshold", cfg.kp_conf_threshold,
                  "keypoints below this confidence are marked invisible");
  cmd->add_option("--nwd-c", cfg.nwd_c, "NWD normalization constant in pixels");
  cmd->add_option("--sigma", cfg.sigma, "heatmap target gaussian std in cells");
  cmd->add_option("--peak-window", cfg.peak_window, "heatmap NMS window radius in cells");
  cmd->add_flag("--no-refine", cfg.no_refine, "disable subpixel peak refinement");
  cmd->add_option("--box-expansion", cfg.box_expansion,
                  "inflate detection boxes before cropping");
  cmd->add_option("--max-dets", cfg.max_dets, "detections kept per image for evaluation");
  cmd->add_option("--fps-budget", cfg.fps_budget, "realtime budget in frames per second");
  cmd->add_option("--jobs", cfg.jobs, "worker cap for parallel sections");
  cmd->add_option("--kp-k", cfg.kp_k, "17 per-keypoint OKS tolerances")->delimiter(',');
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write: " + path);
  }
  out << content;
}

// ---------------------------------------------------------------- merge ---

struct MergeInput {
  std::string path;
  std::vector<std::string> keep;
};

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "path:keep1,keep2" selects per-file classes; bare paths use the global
// keep list. Only a colon after the last path separator counts as a class
// suffix.
MergeInput parse_merge_input(const std::string& token, const std::vector<std::string>& fallback) {
  const size_t colon = token.rfind(':');
  const size_t slash = token.find_last_of('/');
  if (colon == std::string::npos || (slash != std::string::npos && colon < slash)) {
    return {token, fallback};
  }
  return {token.substr(0, colon), split_csv(token.substr(colon + 1))};
}

std::string stats_table(const std::vector<std::pair<std::string, DatasetStats>>& rows) {
  std::ostringstream out;
  out << "Dataset                 Images  Annots   Small  Medium   Large  KP-anns\n";
  out << "------------------------------------------------------------------------\n";
  for (const auto& [name, s] : rows) {
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%-22s %7lld %7lld %7lld %7lld %7lld  %7lld\n",
                  name.c_str(), static_cast<long long>(s.images),
                  static_cast<long long>(s.annotations), static_cast<long long>(s.boxes_small),
                  static_cast<long long>(s.boxes_medium), static_cast<long long>(s.boxes_large),
                  static_cast<long long>(s.annotations_with_keypoints));
    out << buf;
  }
  return out.str();
}

Json stats_to_json(const std::string& name, const DatasetStats& s) {
  return Json{{"dataset", name},
              {"images", s.images},
              {"annotations", s.annotations},
              {"boxes_small", s.boxes_small},
              {"boxes_medium", s.boxes_medium},
              {"boxes_large", s.boxes_large},
              {"keypoint_visibility",
               {s.keypoint_visibility[0], s.keypoint_visibility[1], s.keypoint_visibility[2]}},
              {"annotations_with_keypoints", s.annotations_with_keypoints}};
}

int cmd_merge(const std::vector<std::string>& input_tokens,
              const std::vector<std::string>& global_keep, const std::string& split_tag,
              const std::string& output) {
  const Split split = split_from_string(split_tag);
  std::vector<Dataset> parts;
  std::vector<std::pair<std::string, DatasetStats>> rows;
  for (const auto& token : input_tokens) {
    const MergeInput in = parse_merge_input(token, global_keep);
    Dataset raw = load_dataset(in.path, split);
    Dataset filtered = filter_person_classes(raw, in.keep);
    rows.emplace_back(fs::path(in.path).stem().string(), dataset_stats(filtered));
    parts.push_back(std::move(filtered));
  }
  MergeResult merged = merge_datasets(parts);
  save_dataset(merged.dataset, output);

  Json idmap;
  idmap["images"] = Json::array();
  for (const auto& e : merged.image_id_map) {
    idmap["images"].push_back({{"source_dataset", e.source_dataset},
                               {"source_id", e.source_id},
                               {"merged_id", e.merged_id}});
  }
  idmap["annotations"] = Json::array();
  for (const auto& e : merged.annotation_id_map) {
    idmap["annotations"].push_back({{"source_dataset", e.source_dataset},
                                    {"source_id", e.source_id},
                                    {"merged_id", e.merged_id}});
  }
  write_text_file(output + ".idmap.json", idmap.dump(2) + "\n");

  rows.emplace_back("merged", dataset_stats(merged.dataset));
  std::cout << stats_table(rows);
  std::cout << "wrote " << output << " and " << output << ".idmap.json\n";
  return 0;
}

int cmd_stats(const std::vector<std::string>& inputs, const std::string& split_tag,
              const std::string& json_out) {
  const Split split = split_from_string(split_tag);
  std::vector<std::pair<std::string, DatasetStats>> rows;
  Json records = Json::array();
  for (const auto& path : inputs) {
    const Dataset d = load_dataset(path, split);
    const DatasetStats s = dataset_stats(d);
    const std::string name = fs::path(path).stem().string();
    rows.emplace_back(name, s);
    records.push_back(stats_to_json(name, s));
  }
  std::cout << stats_table(rows);
  if (!json_out.empty()) {
    write_text_file(json_out, records.dump(2) + "\n");
  }
  return 0;
}

// ----------------------------------------------------------------- eval ---

int cmd_eval(const std::vector<std::string>& gt_paths,
             const std::vector<std::string>& results_paths, std::vector<std::string> names,
             bool keypoint_mode, const Config& cfg, const std::string& report_out) {
  if (gt_paths.size() != results_paths.size() || gt_paths.empty()) {
    throw ValidationError("eval: need matching nonempty --gt and --results lists");
  }
  EvalConfig eval_cfg = EvalConfig::defaults();
  eval_cfg.max_dets = cfg.max_dets;
  if (!cfg.kp_k.empty()) {
    for (int i = 0; i < kNumKeypoints; ++i) {
      eval_cfg.kp_k[i] = cfg.kp_k[i];
    }
  }

  std::vector<std::tuple<std::string, EvalReport, int64_t>> rows;
  for (size_t i = 0; i < gt_paths.size(); ++i) {
    const Dataset d = load_dataset(gt_paths[i], Split::kTest);
    const std::vector<Detection> dets = load_detections(results_paths[i]);
    const EvalReport report = keypoint_mode ? evaluate_keypoints(d, dets, eval_cfg)
                                            : evaluate_detections(d, dets, eval_cfg);
    const std::string name =
        i < names.size() ? names[i] : fs::path(gt_paths[i]).stem().string();
    rows.emplace_back(name, report, static_cast<int64_t>(d.images.size()));
  }

  std::cout << format_report_table(rows);

  if (!report_out.empty()) {
    if (rows.size() == 1) {
      write_text_file(report_out, report_to_json(std::get<1>(rows[0])));
    } else {
      Json doc;
      doc["datasets"] = Json::array();
      std::vector<std::pair<EvalReport, int64_t>> weighted;
      for (const auto& [name, report, frames] : rows) {
        doc["datasets"].push_back({{"name", name},
                                   {"frames", frames},
                                   {"report", Json::parse(report_to_json(report))}});
        weighted.emplace_back(report, frames);
      }
      doc["weighted_average"] = Json::parse(report_to_json(weighted_average(weighted)));
      write_text_file(report_out, doc.dump(2) + "\n");
    }
  }
  return 0;
}

// ------------------------------------------------------------- backends ---

std::shared_ptr<DetectorBackend> make_detector(const std::string& spec,
                                               const std::optional<Dataset>& gt,
                                               double delay_ms) {
  std::shared_ptr<DetectorBackend> backend;
  if (spec == "gt") {
    if (!gt) throw ValidationError("detector 'gt' needs --gt annotations");
    backend = std::make_shared<GtReplayDetector>(*gt);
  } else if (spec.rfind("const:", 0) == 0) {
    // ';' between boxes, ',' within
    std::vector<Box> boxes;
    std::stringstream groups(spec.substr(6));
    std::string token;
    while (std::getline(groups, token, ';')) {
      const auto fields = split_csv(token);
      if (fields.size() < 4) {
        throw ValidationError("const detector spec needs x,y,w,h[,score]");
      }
      Box b{std::stod(fields[0]), std::stod(fields[1]), std::stod(fields[2]),
            std::stod(fields[3]), fields.size() > 4 ? std::stod(fields[4]) : 1.0};
      boxes.push_back(b);
    }
    backend = std::make_shared<ConstDetector>(boxes);
  } else if (spec.rfind("external:", 0) == 0) {
    backend = std::make_shared<ExternalDetector>(spec.substr(9));
  } else {
    throw ValidationError("unknown detector spec: " + spec +
                          " (expected gt | const:... | external:...)");
  }
  if (delay_ms > 0) {
    backend = std::make_shared<DelayedDetector>(backend, delay_ms);
  }
  return backend;
}

std::shared_ptr<PoseBackend> make_pose(const std::string& spec, const std::optional<Dataset>& gt,
                                       const CodecConfig& codec, double delay_ms) {
  std::shared_ptr<PoseBackend> backend;
  if (spec == "gt") {
    if (!gt) throw ValidationError("pose 'gt' needs --gt annotations");
    backend = std::make_shared<GtReplayPose>(*gt, codec);
  } else if (spec == "fixed") {
    backend = std::make_shared<FixedPose>(
        FixedPose::default_layout(codec.patch_width, codec.patch_height), codec);
  } else if (spec.rfind("external:", 0) == 0) {
    backend = std::make_shared<ExternalPose>(spec.substr(9));
  } else {
    throw ValidationError("unknown pose spec: " + spec +
                          " (expected gt | fixed | external:...)");
  }
  if (delay_ms > 0) {
    backend = std::make_shared<DelayedPose>(backend, delay_ms);
  }
  return backend;
}

std::unique_ptr<FrameSource> make_frame_source(const std::string& frames_dir,
                                               const std::string& raw_path, int raw_w, int raw_h,
                                               const std::optional<Dataset>& gt) {
  if (!frames_dir.empty()) {
    if (gt) {
      // Resolve frame ids from annotation file names (with or without
      // directory and extension).
      auto by_name = std::make_shared<std::map<std::string, int64_t>>();
      for (const auto& img : gt->images) {
        (*by_name)[fs::path(img.file_name).stem().string()] = img.id;
        (*by_name)[img.file_name] = img.id;
      }
      return std::make_unique<DirectoryFrameSource>(
          frames_dir, [by_name](const std::string& name) -> std::optional<int64_t> {
            const auto it = by_name->find(name);
            if (it == by_name->end()) return std::nullopt;
            return it->second;
          });
    }
    return std::make_unique<DirectoryFrameSource>(frames_dir);
  }
  if (!raw_path.empty()) {
    return std::make_unique<RawStreamFrameSource>(raw_path, raw_w, raw_h);
  }
  throw ValidationError("need --frames DIR or --raw FILE with --width/--height");
}

std::vector<Frame> synthetic_frames(int width, int height, int count, uint64_t seed) {
  Rng rng(seed);
  std::vector<Frame> frames;
  for (int i = 0; i < count; ++i) {
    Frame f;
    f.id = i;
    f.name = "synthetic_" + std::to_string(i);
    f.image = ImageU8(width, height, {90, 110, 90});
    for (int r = 0; r < 6; ++r) {
      const int x = static_cast<int>(rng.uniform_int(0, width - 2));
      const int y = static_cast<int>(rng.uniform_int(0, height - 2));
      const int w = static_cast<int>(rng.uniform_int(1, std::max(1, width / 4)));
      const int h = static_cast<int>(rng.uniform_int(1, std::max(1, height / 4)));
      const Color c{static_cast<uint8_t>(rng.uniform_int(0, 255)),
                    static_cast<uint8_t>(rng.uniform_int(0, 255)),
                    static_cast<uint8_t>(rng.uniform_int(0, 255))};
      for (int yy = y; yy < std::min(height, y + h); ++yy) {
        for (int xx = x; xx < std::min(width, x + w); ++xx) {
          f.image.set(xx, yy, c);
        }
      }
    }
    f.timestamp_ms = i;
    frames.push_back(std::move(f));
  }
  return frames;
}

// ------------------------------------------------------------------ run ---

int cmd_run(const std::string& frames_dir, const std::string& raw_path, int raw_w, int raw_h,
            const std::string& gt_path, const std::string& detector_spec,
            const std::string& pose_spec, double det_delay, double pose_delay, bool pipelined,
            int pose_batch, const Config& cfg, const std::string& out_path,
            const std::string& timings_path, const std::string& overlay_dir) {
  std::optional<Dataset> gt;
  if (!gt_path.empty()) {
    gt = load_dataset(gt_path, Split::kTest);
  }
  RunOptions opts;
  opts.det_conf_threshold = cfg.det_conf_threshold;
  opts.codec = cfg.codec();
  opts.box_expansion = cfg.box_expansion;
  // Pipelining needs a second worker; --jobs caps it.
  opts.pipelined = pipelined && cfg.jobs >= 2;
  opts.pose_batch = pose_batch;

  auto detector = make_detector(detector_spec, gt, det_delay);
  auto pose = make_pose(pose_spec, gt, opts.codec, pose_delay);
  auto source = make_frame_source(frames_dir, raw_path, raw_w, raw_h, gt);

  std::vector<PoseResult> results;
  run_sequence(*source, *detector, *pose, opts, [&](const PoseResult& r) {
    results.push_back(r);
  });

  if (!out_path.empty()) {
    write_text_file(out_path, results_to_json(results));
  }
  if (!timings_path.empty()) {
    write_text_file(timings_path, timings_to_json(results));
  }
  if (!overlay_dir.empty()) {
    fs::create_directories(overlay_dir);
    // Re-read frames for rendering; sources are one-pass.
    auto render_source = make_frame_source(frames_dir, raw_path, raw_w, raw_h, gt);
    std::map<int64_t, const PoseResult*> by_id;
    for (const auto& r : results) {
      by_id[r.frame_id] = &r;
    }
    while (auto frame = render_source->next()) {
      const auto it = by_id.find(frame->id);
      if (it == by_id.end()) continue;
      const std::string out =
          (fs::path(overlay_dir) / (frame->name + "_overlay.ppm")).string();
      render_overlay(*frame, *it->second, out);
    }
  }

  size_t persons = 0;
  size_t errors = 0;
  for (const auto& r : results) {
    persons += r.persons.size();
    if (r.error) ++errors;
  }
  std::cout << "processed " << results.size() << " frames, " << persons << " persons, "
            << errors << " frame errors\n";
  return errors == 0 ? 0 : 1;
}

// ---------------------------------------------------------------- bench ---

int cmd_bench(const std::string& frames_dir, const std::string& raw_path, int raw_w, int raw_h,
              const std::string& synthetic_spec, const std::string& gt_path,
              const std::string& detector_spec, const std::string& pose_spec, double det_delay,
              double pose_delay, int warmup_frames, const Config& cfg,
              const std::string& out_path) {
  std::optional<Dataset> gt;
  if (!gt_path.empty()) {
    gt = load_dataset(gt_path, Split::kTest);
  }

  std::vector<Frame> frames;
  if (!synthetic_spec.empty()) {
    int w = 0, h = 0, n = 0;
    if (std::sscanf(synthetic_spec.c_str(), "%dx%dx%d", &w, &h, &n) != 3 || w <= 0 || h <= 0 ||
        n <= 0) {
      throw ValidationError("--synthetic expects WxHxN, e.g. 1920x1080x50");
    }
    frames = synthetic_frames(w, h, n, cfg.seed);
  } else {
    auto source = make_frame_source(frames_dir, raw_path, raw_w, raw_h, gt);
    while (auto frame = source->next()) {
      frames.push_back(std::move(*frame));
    }
  }
  if (frames.empty()) {
    throw ValidationError("bench: no frames to measure");
  }

  BenchOptions opts;
  opts.run.det_conf_threshold = cfg.det_conf_threshold;
  opts.run.codec = cfg.codec();
  opts.run.box_expansion = cfg.box_expansion;
  opts.warmup_frames = std::min<int>(warmup_frames, static_cast<int>(frames.size()) - 1);
  opts.fps_budget = cfg.fps_budget;

  auto detector = make_detector(detector_spec, gt, det_delay);
  auto pose = make_pose(pose_spec, gt, opts.run.codec, pose_delay);

  const LatencyReport report = bench_pipeline(frames, *detector, *pose, opts);
  std::cout << format_latency_table(report);
  if (!out_path.empty()) {
    write_text_file(out_path, latency_report_to_json(report));
  }
  return 0;
}

// --------------------------------------------------------------- render ---

int cmd_render(const std::string& frames_dir, const std::string& gt_path,
               const std::string& results_path, const Config& cfg,
               const std::string& out_dir) {
  std::optional<Dataset> gt;
  if (!gt_path.empty()) {
    gt = load_dataset(gt_path, Split::kTest);
  }
  const std::vector<Detection> dets = load_detections(results_path);
  std::map<int64_t, std::vector<PersonPose>> persons_by_image;
  for (const auto& det : dets) {
    PersonPose person;
    person.box = det.box;
    if (det.keypoints) {
      person.keypoints = *det.keypoints;
      for (int i = 0; i < kNumKeypoints; ++i) {
        person.keypoints.points[i].v =
            person.keypoints.confidences[i] >= cfg.kp_conf_threshold ? 2 : 0;
      }
    }
    persons_by_image[det.image_id].push_back(std::move(person));
  }

  fs::create_directories(out_dir);
  auto source = make_frame_source(frames_dir, "", 0, 0, gt);
  size_t rendered = 0;
  while (auto frame = source->next()) {
    std::vector<PersonPose> persons;
    const auto it = persons_by_image.find(frame->id);
    if (it != persons_by_image.end()) {
      persons = it->second;
      // Highest-score person first, as in pipeline output.
      std::stable_sort(persons.begin(), persons.end(), [](const auto& a, const auto& b) {
        return a.box.score.value_or(0.0) > b.box.score.value_or(0.0);
      });
    }
    const ImageU8 rendered_img = render_overlay_image(frame->image, persons);
    write_ppm(rendered_img, (fs::path(out_dir) / (frame->name + "_overlay.ppm")).string());
    ++rendered;
  }
  std::cout << "rendered " << rendered << " overlays to " << out_dir << "\n";
  return 0;
}

std::string find_config_arg(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      return argv[i + 1];
    }
  }
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  Config cfg;
  try {
    const std::string config_path = find_config_arg(argc, argv);
    if (!config_path.empty()) {
      cfg = load_config_file(config_path);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  CLI::App app{"top-down aerial pose estimation toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  bool print_config = false;
  app.add_option("--config", config_path, "JSON config file (flags override it)");
  app.add_flag("--print-config", print_config, "dump the effective configuration and exit");

  // merge
  auto* merge = app.add_subcommand("merge", "filter to the person class and merge datasets");
  std::vector<std::string> merge_inputs;
  std::vector<std::string> keep = {"person"};
  std::string split_tag = "train";
  std::string merge_out;
  merge->add_option("inputs", merge_inputs, "annotation files, optionally path:keep1,keep2")
      ->required();
  merge->add_option("--keep", keep, "class names kept for bare inputs")->delimiter(',');
  merge->add_option("--split", split_tag, "train|val|test");
  merge->add_option("-o,--output", merge_out, "merged annotation file")->required();
  register_config_options(merge, cfg);

  // stats
  auto* stats = app.add_subcommand("stats", "dataset statistics");
  std::vector<std::string> stats_inputs;
  std::string stats_split = "train";
  std::string stats_json;
  stats->add_option("inputs", stats_inputs, "annotation files")->required();
  stats->add_option("--split", stats_split, "train|val|test");
  stats->add_option("--json", stats_json, "write machine-readable records here");
  register_config_options(stats, cfg);

  // eval-det / eval-kp
  std::vector<std::string> eval_gts, eval_results, eval_names;
  std::string eval_report_out;
  const auto add_eval_options = [&](CLI::App* cmd) {
    cmd->add_option("--gt", eval_gts, "ground-truth annotation files")->required();
    cmd->add_option("--results", eval_results, "detection/keypoint results files")->required();
    cmd->add_option("--name", eval_names, "display names per dataset");
    cmd->add_option("--report", eval_report_out, "write the report document here");
    register_config_options(cmd, cfg);
  };
  auto* eval_det = app.add_subcommand("eval-det", "COCO detection mAP/AR evaluation");
  add_eval_options(eval_det);
  auto* eval_kp = app.add_subcommand("eval-kp", "COCO keypoint mAP evaluation");
  add_eval_options(eval_kp);

  // run
  auto* run = app.add_subcommand("run", "run the detect->pose pipeline over frames");
  std::string frames_dir, raw_path, gt_path, detector_spec = "gt", pose_spec = "gt";
  int raw_w = 0, raw_h = 0, pose_batch = 1;
  double det_delay = 0.0, pose_delay = 0.0;
  bool pipelined = false;
  std::string run_out = "results.json", run_timings, run_overlay_dir;
  run->add_option("--frames", frames_dir, "directory of .ppm frames");
  run->add_option("--raw", raw_path, "raw RGB24 frame stream (external decoder output)");
  run->add_option("--width", raw_w, "raw stream frame width");
  run->add_option("--height", raw_h, "raw stream frame height");
  run->add_option("--gt", gt_path, "annotations for id resolution and gt backends");
  run->add_option("--detector", detector_spec, "gt | const:x,y,w,h,s;... | external:CMD");
  run->add_option("--pose", pose_spec, "gt | fixed | external:CMD");
  run->add_option("--det-delay-ms", det_delay, "synthetic detector delay");
  run->add_option("--pose-delay-ms", pose_delay, "synthetic pose delay");
  run->add_flag("--pipelined", pipelined, "overlap detection with the previous frame's pose");
  run->add_option("--pose-batch", pose_batch, "batch size for pose calls within a frame");
  run->add_option("-o,--out", run_out, "results document (COCO keypoint results schema)");
  run->add_option("--timings", run_timings, "per-frame stage timing sidecar");
  run->add_option("--overlay-dir", run_overlay_dir, "also render overlays into this directory");
  register_config_options(run, cfg);

  // bench
  auto* bench = app.add_subcommand("bench", "per-stage latency benchmark");
  std::string bench_frames, bench_raw, bench_synthetic, bench_gt, bench_out;
  std::string bench_detector = "const:100,100,96,128,0.9", bench_pose = "fixed";
  int bench_raw_w = 0, bench_raw_h = 0, bench_warmup = 10;
  double bench_det_delay = 0.0, bench_pose_delay = 0.0;
  bench->add_option("--frames", bench_frames, "directory of .ppm frames");
  bench->add_option("--raw", bench_raw, "raw RGB24 frame stream");
  bench->add_option("--width", bench_raw_w, "raw stream frame width");
  bench->add_option("--height", bench_raw_h, "raw stream frame height");
  bench->add_option("--synthetic", bench_synthetic, "generate WxHxN synthetic frames");
  bench->add_option("--gt", bench_gt, "annotations for gt backends");
  bench->add_option("--detector", bench_detector, "gt | const:... | external:CMD");
  bench->add_option("--pose", bench_pose, "gt | fixed | external:CMD");
  bench->add_option("--det-delay-ms", bench_det_delay, "synthetic detector delay");
  bench->add_option("--pose-delay-ms", bench_pose_delay, "synthetic pose delay");
  bench->add_option("--warmup-frames", bench_warmup, "frames excluded from statistics");
  bench->add_option("-o,--out", bench_out, "latency report document");
  register_config_options(bench, cfg);

  // render
  auto* render = app.add_subcommand("render", "draw detection and skeleton overlays");
  std::string render_frames, render_gt, render_results, render_out_dir = "overlays";
  render->add_option("--frames", render_frames, "directory of .ppm frames")->required();
  render->add_option("--gt", render_gt, "annotations for id resolution");
  render->add_option("--results", render_results, "results document to draw")->required();
  render->add_option("--out-dir", render_out_dir, "output directory");
  register_config_options(render, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    validate_config(cfg);
    if (print_config) {
      Json doc = cfg.to_json();
      doc["subcommand"] =
          app.get_subcommands().empty() ? "" : app.get_subcommands()[0]->get_name();
      std::cout << doc.dump(2) << "\n";
      return 0;
    }
    if (merge->parsed()) {
      return cmd_merge(merge_inputs, keep, split_tag, merge_out);
    }
    if (stats->parsed()) {
      return cmd_stats(stats_inputs, stats_split, stats_json);
    }
    if (eval_det->parsed() || eval_kp->parsed()) {
      return cmd_eval(eval_gts, eval_results, eval_names, eval_kp->parsed(), cfg,
                      eval_report_out);
    }
    if (run->parsed()) {
      return cmd_run(frames_dir, raw_path, raw_w, raw_h, gt_path, detector_spec, pose_spec,
                     det_delay, pose_delay, pipelined, pose_batch, cfg, run_out, run_timings,
                     run_overlay_dir);
    }
    if (bench->parsed()) {
      return cmd_bench(bench_frames, bench_raw, bench_raw_w, bench_raw_h, bench_synthetic,
                       bench_gt, bench_detector, bench_pose, bench_det_delay, bench_pose_delay,
                       bench_warmup, cfg, bench_out);
    }
    if (render->parsed()) {
      return cmd_render(render_frames, render_gt, render_results, cfg, render_out_dir);
    }
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
