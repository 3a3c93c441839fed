#pragma once

#include <cstdint>
#include <cstddef>

namespace uavshare {

/// Portable seeded generator: xoshiro256** with splitmix64 seeding.
///
/// All draws in the library go through this type so a (config, seed) pair
/// reproduces bit-for-bit on any platform. Floating-point draws take the
/// top 53 bits of the next output; integer draws use rejection sampling.
/// No std::*_distribution is used anywhere, since their output is
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream for (seed, stream), e.g. one per outer iteration.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi]; returns lo exactly when lo == hi.
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). n must be > 0.
  std::size_t index(std::size_t n);
  /// Standard normal via Box-Muller (one value per call).
  double normal();

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace uavshare
