#include "posekit/augment.hpp"

#include <algorithm>
#include <cmath>

#include "posekit/errors.hpp"

namespace posekit {

double sample_factor(const DownscaleSpec& spec, Rng& stream) {
  if (spec.min_factor < 0.0 || spec.min_factor > spec.max_factor || spec.max_factor >= 1.0) {
    throw ContractError("sample_factor: require 0 <= min_factor <= max_factor < 1");
  }
  return stream.uniform(spec.min_factor, spec.max_factor);
}

ImageU8 downscale_patch(const ImageU8& patch, const DownscaleSpec& spec, Rng& stream) {
  if (patch.empty()) {
    throw ContractError("downscale_patch: patch is empty");
  }
  const double f = sample_factor(spec, stream);
  const int small_w = std::max(1, static_cast<int>(std::lround((1.0 - f) * patch.width)));
  const int small_h = std::max(1, static_cast<int>(std::lround((1.0 - f) * patch.height)));
  if (small_w == patch.width && small_h == patch.height) {
    return patch;
  }
  const ImageU8 shrunk = resize_bilinear(patch, small_w, small_h);
  return resize_bilinear(shrunk, patch.width, patch.height);
}

ImageU8 downscale_patch(const ImageU8& patch, const DownscaleSpec& spec) {
  Rng stream(spec.seed);
  return downscale_patch(patch, spec, stream);
}

}  // namespace posekit
