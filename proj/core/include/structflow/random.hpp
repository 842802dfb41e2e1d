#pragma once

#include <cstdint>

namespace structflow {

/// SplitMix64 (Steele, Lea, Flood 2014): a counter-based generator whose
/// state is a single 64-bit counter advanced by the golden-ratio increment.
/// Chosen so generated problems are reproducible bit for bit on any platform
/// and from any language. Normals come from the Box–Muller transform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  double normal();

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace structflow
