#include "fixtures.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>

namespace posekit::testsupport {

namespace fs = std::filesystem;

EvalInstance random_eval_instance(Rng& rng, const InstanceOptions& opts) {
  EvalInstance instance;
  instance.dataset.split = Split::kTest;
  instance.dataset.categories = {{1, "person"}};

  const int n_images = static_cast<int>(rng.uniform_int(1, opts.max_images));
  int64_t next_ann_id = 1;
  // Discrete scores and snapped coordinates create ties on purpose.
  const auto snapped = [&](double lo, double hi) {
    double v = rng.uniform(lo, hi);
    if (rng.next_double() < 0.5) {
      v = std::round(v / 5.0) * 5.0;
    }
    return v;
  };
  const auto discrete_score = [&] {
    return 0.1 + 0.1 * static_cast<double>(rng.uniform_int(0, 8));
  };

  for (int im = 0; im < n_images; ++im) {
    ImageRecord img;
    img.id = im + 1;
    img.file_name = "img_" + std::to_string(im + 1) + ".jpg";
    img.width = static_cast<int>(opts.frame_w);
    img.height = static_cast<int>(opts.frame_h);
    img.source_dataset = "synthetic";
    instance.dataset.images.push_back(img);

    const int n_gts = static_cast<int>(rng.uniform_int(0, opts.max_gts));
    std::vector<Box> gt_boxes;
    for (int g = 0; g < n_gts; ++g) {
      AnnRecord ann;
      ann.id = next_ann_id++;
      ann.image_id = img.id;
      ann.category_id = 1;
      ann.bbox.x = snapped(0, opts.frame_w * 0.6);
      ann.bbox.y = snapped(0, opts.frame_h * 0.6);
      ann.bbox.w = std::max(1.0, snapped(5, 60));
      ann.bbox.h = std::max(1.0, snapped(5, 60));
      // Sometimes a non-box area, as segmentation-style sources have.
      ann.area = ann.bbox.w * ann.bbox.h * (rng.next_double() < 0.3 ? 0.7 : 1.0);
      ann.iscrowd = rng.next_double() < 0.15;
      if (opts.keypoints) {
        KeypointSet kps;
        const bool all_invisible = rng.next_double() < 0.1;
        for (int i = 0; i < kNumKeypoints; ++i) {
          kps.points[i].x = ann.bbox.x + rng.next_double() * ann.bbox.w;
          kps.points[i].y = ann.bbox.y + rng.next_double() * ann.bbox.h;
          const double u = rng.next_double();
          kps.points[i].v = all_invisible ? 0 : (u < 0.2 ? 0 : (u < 0.5 ? 1 : 2));
        }
        ann.keypoints = kps;
        ann.num_keypoints = kps.visible_count();
      }
      gt_boxes.push_back(ann.bbox);
      instance.dataset.annotations.push_back(std::move(ann));
    }

    const int n_dets = static_cast<int>(rng.uniform_int(0, opts.max_dets));
    for (int dd = 0; dd < n_dets; ++dd) {
      Detection det;
      det.image_id = img.id;
      if (!gt_boxes.empty() && rng.next_double() < 0.7) {
        // Perturbed copy of a ground truth to populate the high-IoU regime.
        const Box& base = gt_boxes[static_cast<size_t>(
            rng.uniform_int(0, static_cast<int64_t>(gt_boxes.size()) - 1))];
        det.box.x = base.x + rng.uniform(-8, 8);
        det.box.y = base.y + rng.uniform(-8, 8);
        det.box.w = std::max(1.0, base.w + rng.uniform(-8, 8));
        det.box.h = std::max(1.0, base.h + rng.uniform(-8, 8));
      } else {
        det.box.x = snapped(0, opts.frame_w * 0.6);
        det.box.y = snapped(0, opts.frame_h * 0.6);
        det.box.w = std::max(1.0, snapped(5, 60));
        det.box.h = std::max(1.0, snapped(5, 60));
      }
      det.box.score = discrete_score();
      if (opts.keypoints) {
        KeypointSet kps;
        // Mostly keypoints near the matched ground truths; noise elsewhere.
        const AnnRecord* base = nullptr;
        for (const auto& ann : instance.dataset.annotations) {
          if (ann.image_id == img.id && ann.keypoints && rng.next_double() < 0.5) {
            base = &ann;
            break;
          }
        }
        for (int i = 0; i < kNumKeypoints; ++i) {
          if (base) {
            kps.points[i].x = base->keypoints->points[i].x + rng.uniform(-10, 10);
            kps.points[i].y = base->keypoints->points[i].y + rng.uniform(-10, 10);
          } else {
            kps.points[i].x = det.box.x + rng.next_double() * det.box.w;
            kps.points[i].y = det.box.y + rng.next_double() * det.box.h;
          }
          kps.points[i].v = 2;
          kps.confidences[i] = rng.next_double();
        }
        det.keypoints = kps;
      }
      instance.detections.push_back(std::move(det));
    }
  }
  return instance;
}

SyntheticScene make_synthetic_scene(const fs::path& root, int n_images, int max_persons,
                                    uint64_t seed) {
  Rng rng(seed);
  SyntheticScene scene;
  scene.frames_dir = root / "frames";
  fs::create_directories(scene.frames_dir);
  scene.dataset.split = Split::kTest;
  scene.dataset.categories = {{1, "person"}};

  const int frame_w = 480;
  const int frame_h = 360;
  int64_t next_ann_id = 1;
  for (int im = 0; im < n_images; ++im) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%03d", im);

    ImageRecord img;
    img.id = im + 1;
    img.file_name = std::string(name) + ".ppm";
    img.width = frame_w;
    img.height = frame_h;
    img.source_dataset = "synthetic";
    scene.dataset.images.push_back(img);

    ImageU8 frame(frame_w, frame_h, {96, 96, 96});
    const int persons = static_cast<int>(rng.uniform_int(1, max_persons));
    for (int p = 0; p < persons; ++p) {
      AnnRecord ann;
      ann.id = next_ann_id++;
      ann.image_id = img.id;
      ann.category_id = 1;
      ann.bbox.w = rng.uniform(80, 140);
      ann.bbox.h = rng.uniform(120, 200);
      ann.bbox.x = rng.uniform(0, frame_w - ann.bbox.w);
      ann.bbox.y = rng.uniform(0, frame_h - ann.bbox.h);
      ann.area = ann.bbox.w * ann.bbox.h;

      // Paint the person region so overlays have something to sit on.
      for (int y = static_cast<int>(ann.bbox.y); y < static_cast<int>(ann.bbox.y2()); ++y) {
        for (int x = static_cast<int>(ann.bbox.x); x < static_cast<int>(ann.bbox.x2()); ++x) {
          frame.set(x, y, {150, 130, 110});
        }
      }

      // Keypoints well inside the box so decoded peaks stay interior.
      KeypointSet kps;
      const double margin_x = ann.bbox.w * 0.2;
      const double margin_y = ann.bbox.h * 0.2;
      for (int i = 0; i < kNumKeypoints; ++i) {
        kps.points[i].x = ann.bbox.x + margin_x + rng.next_double() * (ann.bbox.w - 2 * margin_x);
        kps.points[i].y = ann.bbox.y + margin_y + rng.next_double() * (ann.bbox.h - 2 * margin_y);
        kps.points[i].v = 2;
      }
      ann.keypoints = kps;
      ann.num_keypoints = kNumKeypoints;
      scene.dataset.annotations.push_back(std::move(ann));
    }
    write_ppm(frame, (scene.frames_dir / (std::string(name) + ".ppm")).string());
  }
  return scene;
}

fs::path scratch_dir(const std::string& tag) {
  static uint64_t counter = 0;
  const fs::path dir = fs::temp_directory_path() /
                       ("posekit_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

}  // namespace posekit::testsupport
