/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pcsim/types.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace pcsim {

  MicroTime MicroTime::fromMicros(double micros) {
    if (!std::isfinite(micros)) {
      throw std::invalid_argument("non-finite duration");
    }
    return fromTicks(
        static_cast<std::int64_t>(std::llround(micros * kTicksPerMicro)));
  }

  std::string MicroTime::str() const {
    return formatScaled(ticks_, kTicksPerMicro);
  }

  std::string formatScaled(__int128 numerator, __int128 denominator) {
    if (denominator <= 0) {
      throw std::invalid_argument("formatScaled: non-positive denominator");
    }
    bool negative = numerator < 0;
    __int128 mag = negative ? -numerator : numerator;
    // value * 1e6, rounded half away from zero
    __int128 scaled = (mag * 1'000'000 * 2 + denominator) / (denominator * 2);
    auto whole = static_cast<unsigned long long>(scaled / 1'000'000);
    auto frac = static_cast<unsigned long long>(scaled % 1'000'000);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%llu.%06llu",
                  (negative && scaled != 0) ? "-" : "", whole, frac);
    return buf;
  }

}  // namespace pcsim
