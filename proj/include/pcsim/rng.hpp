/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <random>

namespace pcsim {

  /// All simulator randomness flows through this engine. Its output sequence
  /// is fixed by the standard, so seeded runs are reproducible across
  /// toolchains as long as the helpers below are used instead of the
  /// implementation-defined std:: distributions.
  using Rng = std::mt19937_64;

  inline std::uint64_t splitmix64(std::uint64_t &state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Independent stream for (seed, stream) pairs.
  inline Rng makeRng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t state = seed ^ (stream * 0xd1b54a32d192ed03ULL);
    return Rng(splitmix64(state));
  }

  /// Uniform integer in [0, n). n must be positive.
  inline std::uint64_t uniformIndex(Rng &rng, std::uint64_t n) {
    // Rejection keeps the draw exactly uniform.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = rng();
    } while (v >= limit);
    return v % n;
  }

  /// Uniform double in [0, 1).
  inline double uniformUnit(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  }

  /// Poisson variate. Large means are split into chunks so the product
  /// method never underflows.
  std::uint64_t poisson(Rng &rng, double mean);

}  // namespace pcsim
