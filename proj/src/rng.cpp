/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pcsim/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace pcsim {

  namespace {
    std::uint64_t poissonSmall(Rng &rng, double mean) {
      const double limit = std::exp(-mean);
      std::uint64_t k = 0;
      double p = uniformUnit(rng);
      while (p > limit) {
        ++k;
        p *= uniformUnit(rng);
      }
      return k;
    }
  }  // namespace

  std::uint64_t poisson(Rng &rng, double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
      throw std::invalid_argument("poisson mean must be finite and >= 0");
    }
    constexpr double kChunk = 16.0;
    std::uint64_t total = 0;
    while (mean > kChunk) {
      total += poissonSmall(rng, kChunk);
      mean -= kChunk;
    }
    if (mean > 0.0) {
      total += poissonSmall(rng, mean);
    }
    return total;
  }

}  // namespace pcsim
