// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace tinet {

/// xoshiro256** generator, seeded through SplitMix64. All randomized
/// behavior in the library flows through this type so results are
/// reproducible from a single 64-bit seed. See README for the exact
/// update rule and the derived-stream convention.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream derived from (seed, index); used for per-cloud /
  /// per-sample streams so batch work is schedule-independent.
  static Rng child(std::uint64_t seed, std::uint64_t index);
  static std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double next_double();

  /// Standard normal via Box-Muller. Draw order: u1 then u2, returns
  /// r*cos(2*pi*u2) first and caches r*sin(2*pi*u2) for the next call.
  double next_gaussian();

  /// Unbiased uniform integer in [0, n), n >= 1.
  std::uint64_t next_below(std::uint64_t n);

private:
  std::uint64_t state_[4];
  double cached_gauss_ = 0.0;
  bool has_cached_gauss_ = false;
};

/// SplitMix64 finalizer (stateless mix).
std::uint64_t mix64(std::uint64_t x);

} // namespace tinet
