#pragma once

#include <cstdint>
#include <random>

namespace posekit {

// Seeded generator with a platform-independent uniform mapping.
// std::uniform_real_distribution is implementation-defined, so draws go
// through the 53-bit mantissa path instead.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi].
  double uniform(double lo, double hi) {
    return lo + next_double() * (hi - lo);
  }

  // Uniform integer in [lo, hi].
  int64_t uniform_int(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(next_double() * static_cast<double>(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace posekit
