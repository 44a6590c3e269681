#include "posekit/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "posekit/errors.hpp"

namespace posekit {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Bilinear sample at a continuous position with pixel centers at integer
// coordinates + 0.5; outside the frame reads as black.
void sample_bilinear(const ImageU8& img, double x, double y, uint8_t* out) {
  const double fx = x - 0.5;
  const double fy = y - 0.5;
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const double wx = fx - x0;
  const double wy = fy - y0;
  for (int c = 0; c < 3; ++c) {
    double acc = 0.0;
    for (int dy = 0; dy <= 1; ++dy) {
      for (int dx = 0; dx <= 1; ++dx) {
        const int px = x0 + dx;
        const int py = y0 + dy;
        if (px < 0 || py < 0 || px >= img.width || py >= img.height) continue;
        const double w = (dx ? wx : 1.0 - wx) * (dy ? wy : 1.0 - wy);
        acc += w * img.px(px, py)[c];
      }
    }
    out[c] = static_cast<uint8_t>(std::lround(std::clamp(acc, 0.0, 255.0)));
  }
}

}  // namespace

ImageU8 crop_patch(const ImageU8& frame, const PatchTransform& t) {
  ImageU8 patch(t.dst_width, t.dst_height);
  for (int y = 0; y < t.dst_height; ++y) {
    for (int x = 0; x < t.dst_width; ++x) {
      const Point src = patch_to_image(t, {x + 0.5, y + 0.5});
      sample_bilinear(frame, src.x, src.y, patch.px(x, y));
    }
  }
  return patch;
}

ImageU8 letterbox(const ImageU8& image, int long_side, LetterboxMap& map) {
  if (image.empty() || long_side <= 0) {
    throw ContractError("letterbox: empty image or non-positive target");
  }
  map.scale = static_cast<double>(long_side) / std::max(image.width, image.height);
  const int new_w = std::max(1, static_cast<int>(std::lround(image.width * map.scale)));
  const int new_h = std::max(1, static_cast<int>(std::lround(image.height * map.scale)));
  const ImageU8 resized = resize_bilinear(image, new_w, new_h);
  ImageU8 canvas(long_side, long_side);
  const int off_x = (long_side - new_w) / 2;
  const int off_y = (long_side - new_h) / 2;
  map.pad_x = off_x;
  map.pad_y = off_y;
  for (int y = 0; y < new_h; ++y) {
    std::copy(resized.px(0, y), resized.px(0, y) + static_cast<size_t>(new_w) * 3,
              canvas.px(off_x, y + off_y));
  }
  return canvas;
}

Box unletterbox_box(const Box& b, const LetterboxMap& map) {
  Box out;
  out.x = (b.x - map.pad_x) / map.scale;
  out.y = (b.y - map.pad_y) / map.scale;
  out.w = b.w / map.scale;
  out.h = b.h / map.scale;
  out.score = b.score;
  return out;
}

namespace {

// Detection-side work for one frame, reusable by the sequential path and by
// the first stage of the pipelined path.
struct DetectedFrame {
  int64_t frame_id = 0;
  std::string frame_name;
  std::vector<Box> boxes;  // thresholded, descending score
  std::vector<PatchTransform> transforms;
  std::vector<ImageU8> patches;
  double preprocess_ms = 0.0;
  double detect_ms = 0.0;
  double crop_ms = 0.0;
  std::optional<PipelineError> error;
  bool end_of_stream = false;
};

DetectedFrame detect_stage(const Frame& frame, DetectorBackend& detector,
                           const RunOptions& opts) {
  DetectedFrame work;
  work.frame_id = frame.id;
  work.frame_name = frame.name;

  LetterboxMap map;
  ImageU8 canvas;
  const bool boxed = detector.wants_letterbox();
  try {
    const auto t0 = Clock::now();
    if (boxed) {
      canvas = letterbox(frame.image, detector.input_long_side(), map);
    }
    work.preprocess_ms = ms_since(t0);
  } catch (const std::exception& e) {
    work.error = {"preprocess", e.what()};
    return work;
  }

  try {
    const auto t0 = Clock::now();
    std::vector<Box> raw = detector.detect(boxed ? canvas : frame.image, frame.id);
    work.detect_ms = ms_since(t0);
    for (Box& b : raw) {
      if (boxed) b = unletterbox_box(b, map);
      if (b.score.value_or(0.0) >= opts.det_conf_threshold && b.w > 0 && b.h > 0) {
        work.boxes.push_back(b);
      }
    }
    std::stable_sort(work.boxes.begin(), work.boxes.end(), [](const Box& a, const Box& b) {
      return a.score.value_or(0.0) > b.score.value_or(0.0);
    });
  } catch (const std::exception& e) {
    work.error = {"detect", e.what()};
    return work;
  }

  try {
    const auto t0 = Clock::now();
    for (const Box& b : work.boxes) {
      const PatchTransform t = make_patch_transform(
          b, frame.width(), frame.height(), opts.box_expansion, opts.codec.patch_width,
          opts.codec.patch_height);
      work.transforms.push_back(t);
      work.patches.push_back(crop_patch(frame.image, t));
    }
    work.crop_ms = ms_since(t0);
  } catch (const std::exception& e) {
    work.error = {"crop", e.what()};
    work.boxes.clear();
    work.transforms.clear();
    work.patches.clear();
  }
  return work;
}

PoseResult pose_stage(DetectedFrame&& work, PoseBackend& pose, const RunOptions& opts) {
  PoseResult result;
  result.frame_id = work.frame_id;
  result.frame_name = work.frame_name;
  result.timings.preprocess_ms = work.preprocess_ms;
  result.timings.detect_ms = work.detect_ms;
  result.timings.crop_decode_ms = work.crop_ms;
  if (work.error) {
    result.error = work.error;
    return result;
  }

  std::vector<PatchContext> contexts;
  contexts.reserve(work.boxes.size());
  for (size_t i = 0; i < work.boxes.size(); ++i) {
    contexts.push_back({work.frame_id, work.boxes[i], work.transforms[i]});
  }

  std::vector<HeatmapStack> stacks;
  try {
    const auto t0 = Clock::now();
    if (opts.pose_batch > 1) {
      for (size_t begin = 0; begin < work.patches.size();
           begin += static_cast<size_t>(opts.pose_batch)) {
        const size_t end =
            std::min(begin + static_cast<size_t>(opts.pose_batch), work.patches.size());
        std::vector<ImageU8> chunk(work.patches.begin() + begin, work.patches.begin() + end);
        std::vector<PatchContext> ctx_chunk(contexts.begin() + begin, contexts.begin() + end);
        auto part = pose.estimate_batch(chunk, ctx_chunk);
        for (auto& hm : part) stacks.push_back(std::move(hm));
      }
    } else {
      for (size_t i = 0; i < work.patches.size(); ++i) {
        stacks.push_back(pose.estimate(work.patches[i], contexts[i]));
      }
    }
    result.timings.pose_ms = ms_since(t0);
  } catch (const std::exception& e) {
    result.error = {"pose", e.what()};
    return result;
  }

  try {
    const auto t0 = Clock::now();
    for (size_t i = 0; i < stacks.size(); ++i) {
      PersonPose person;
      person.box = work.boxes[i];
      person.transform = work.transforms[i];
      person.keypoints = decode(stacks[i], work.transforms[i], opts.codec);
      result.persons.push_back(std::move(person));
    }
    result.timings.crop_decode_ms += ms_since(t0);
  } catch (const std::exception& e) {
    result.error = {"decode", e.what()};
    result.persons.clear();
  }
  return result;
}

}  // namespace

PoseResult run_frame(const Frame& frame, DetectorBackend& detector, PoseBackend& pose,
                     const RunOptions& opts) {
  return pose_stage(detect_stage(frame, detector, opts), pose, opts);
}

namespace {

// Bounded FIFO handing detection work to the pose stage.
class WorkQueue {
 public:
  explicit WorkQueue(size_t capacity) : capacity_(capacity) {}

  void push(DetectedFrame&& item) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_; });
    items_.push_back(std::move(item));
    not_empty_.notify_one();
  }

  DetectedFrame pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return !items_.empty(); });
    DetectedFrame item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

 private:
  size_t capacity_;
  std::deque<DetectedFrame> items_;
  std::mutex mutex_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
};

}  // namespace

void run_sequence(FrameSource& frames, DetectorBackend& detector, PoseBackend& pose,
                  const RunOptions& opts, const ResultSink& sink) {
  if (!opts.pipelined) {
    while (auto frame = frames.next()) {
      sink(run_frame(*frame, detector, pose, opts));
    }
    return;
  }

  WorkQueue queue(4);
  std::exception_ptr detect_failure;
  std::thread producer([&] {
    try {
      while (auto frame = frames.next()) {
        queue.push(detect_stage(*frame, detector, opts));
      }
    } catch (...) {
      // Source-level failure (not a per-frame backend error): remember it
      // and end the stream.
      detect_failure = std::current_exception();
    }
    DetectedFrame eos;
    eos.end_of_stream = true;
    queue.push(std::move(eos));
  });

  while (true) {
    DetectedFrame work = queue.pop();
    if (work.end_of_stream) break;
    sink(pose_stage(std::move(work), pose, opts));
  }
  producer.join();
  if (detect_failure) {
    std::rethrow_exception(detect_failure);
  }
}

std::vector<PoseResult> run_sequence_collect(FrameSource& frames, DetectorBackend& detector,
                                             PoseBackend& pose, const RunOptions& opts) {
  std::vector<PoseResult> out;
  run_sequence(frames, detector, pose, opts, [&](const PoseResult& r) { out.push_back(r); });
  return out;
}

DirectoryFrameSource::DirectoryFrameSource(const std::string& dir)
    : DirectoryFrameSource(dir, nullptr) {}

DirectoryFrameSource::DirectoryFrameSource(
    const std::string& dir,
    std::function<std::optional<int64_t>(const std::string&)> id_by_name)
    : id_by_name_(std::move(id_by_name)) {
  if (!fs::is_directory(dir)) {
    throw IoError("frame directory does not exist: " + dir);
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") {
      paths_.push_back(entry.path().string());
    }
  }
  std::sort(paths_.begin(), paths_.end());
}

std::optional<Frame> DirectoryFrameSource::next() {
  if (index_ >= paths_.size()) {
    return std::nullopt;
  }
  const std::string path = paths_[index_];
  Frame frame;
  frame.name = fs::path(path).stem().string();
  frame.id = static_cast<int64_t>(index_);
  frame.timestamp_ms = static_cast<double>(index_);
  if (id_by_name_) {
    if (auto mapped = id_by_name_(frame.name)) {
      frame.id = *mapped;
    }
  }
  frame.image = read_ppm(path);
  ++index_;
  return frame;
}

RawStreamFrameSource::RawStreamFrameSource(const std::string& path, int width, int height)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw ContractError("raw frame source needs positive dimensions");
  }
  auto file = std::make_shared<std::ifstream>(path, std::ios::binary);
  if (!*file) {
    throw IoError("cannot open raw frame stream: " + path);
  }
  stream_ = file;
}

std::optional<Frame> RawStreamFrameSource::next() {
  Frame frame;
  frame.image = ImageU8(width_, height_);
  stream_->read(reinterpret_cast<char*>(frame.image.data.data()),
                static_cast<std::streamsize>(frame.image.data.size()));
  if (stream_->gcount() == 0) {
    return std::nullopt;
  }
  if (stream_->gcount() != static_cast<std::streamsize>(frame.image.data.size())) {
    throw IoError("raw frame stream ended mid-frame");
  }
  frame.id = index_;
  frame.name = std::to_string(index_);
  frame.timestamp_ms = static_cast<double>(index_);
  ++index_;
  return frame;
}

std::string results_to_json(const std::vector<PoseResult>& results) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& result : results) {
    for (const auto& person : result.persons) {
      nlohmann::ordered_json kps = nlohmann::ordered_json::array();
      for (int i = 0; i < kNumKeypoints; ++i) {
        kps.push_back(person.keypoints.points[i].x);
        kps.push_back(person.keypoints.points[i].y);
        kps.push_back(person.keypoints.confidences[i]);
      }
      doc.push_back({{"image_id", result.frame_id},
                     {"category_id", 1},
                     {"bbox", {person.box.x, person.box.y, person.box.w, person.box.h}},
                     {"score", person.box.score.value_or(0.0)},
                     {"keypoints", std::move(kps)}});
    }
  }
  return doc.dump(2) + "\n";
}

std::string timings_to_json(const std::vector<PoseResult>& results) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& result : results) {
    nlohmann::ordered_json entry = {
        {"frame_id", result.frame_id},
        {"frame_name", result.frame_name},
        {"persons", result.persons.size()},
        {"preprocess_ms", result.timings.preprocess_ms},
        {"detect_ms", result.timings.detect_ms},
        {"crop_decode_ms", result.timings.crop_decode_ms},
        {"pose_ms", result.timings.pose_ms},
    };
    nlohmann::ordered_json patches = nlohmann::ordered_json::array();
    for (const auto& person : result.persons) {
      const auto record = patch_transform_record(person.transform);
      patches.push_back({record[0], record[1], record[2], record[3], record[4], record[5]});
    }
    entry["patches"] = std::move(patches);
    if (result.error) {
      entry["error"] = {{"stage", result.error->stage}, {"message", result.error->message}};
    } else {
      entry["error"] = nullptr;
    }
    doc.push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

}  // namespace posekit
