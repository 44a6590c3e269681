#pragma once

// Shared generators for randomized and synthetic end-to-end test inputs.

#include <filesystem>
#include <string>
#include <vector>

#include "posekit/dataset.hpp"
#include "posekit/eval.hpp"
#include "posekit/image.hpp"
#include "posekit/rng.hpp"

namespace posekit::testsupport {

struct InstanceOptions {
  int max_images = 5;
  int max_gts = 4;    // per image
  int max_dets = 6;   // per image
  bool keypoints = false;
  double frame_w = 200.0;
  double frame_h = 200.0;
};

struct EvalInstance {
  Dataset dataset;
  std::vector<Detection> detections;
};

// Random instance with deliberate score ties, coordinate grid alignment (to
// provoke similarity ties), crowd regions, zero-visibility keypoint sets and
// non-w*h areas.
EvalInstance random_eval_instance(Rng& rng, const InstanceOptions& opts);

// A dataset of synthetic frames with person boxes, keypoints inside them,
// and matching PPM images on disk (flat background, person painted as a
// rectangle). Keypoints keep >= margin distance from the box border.
struct SyntheticScene {
  Dataset dataset;
  std::filesystem::path frames_dir;
};

SyntheticScene make_synthetic_scene(const std::filesystem::path& root, int n_images,
                                    int max_persons, uint64_t seed);

// Unique scratch directory under the system temp path; caller owns cleanup
// (tests generally leave it for inspection and rely on tmp reaping).
std::filesystem::path scratch_dir(const std::string& tag);

}  // namespace posekit::testsupport
