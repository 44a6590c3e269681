#pragma once

#include <cstdint>

#include "posekit/image.hpp"
#include "posekit/rng.hpp"

namespace posekit {

// Down-up resampling that keeps dimensions but discards detail, simulating
// persons seen from greater distance. The factor is the fraction of size
// removed in the intermediate image.
struct DownscaleSpec {
  double min_factor = 0.05;
  double max_factor = 0.20;
  uint64_t seed = 0;
};

// Uniform draw in [min_factor, max_factor]; advances the stream.
double sample_factor(const DownscaleSpec& spec, Rng& stream);

// Draws the factor from the given stream, shrinks to round((1-f) * dims)
// (at least 1px per side) with bilinear sampling, and resizes back.
// Output dimensions always equal input dimensions; f = 0 is byte-exact.
ImageU8 downscale_patch(const ImageU8& patch, const DownscaleSpec& spec, Rng& stream);

// Convenience: one-shot draw from a stream seeded with spec.seed.
ImageU8 downscale_patch(const ImageU8& patch, const DownscaleSpec& spec);

}  // namespace posekit
