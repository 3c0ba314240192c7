/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace pcsim {

  using Slot = std::uint64_t;
  using Epoch = std::uint64_t;

  /// Fixed-point duration in microseconds with six decimal places.
  ///
  /// Durations are stored as an integer count of 1e-6 microseconds so that
  /// per-batch accounting identities hold exactly and CSV output re-aggregates
  /// without rounding drift.
  class MicroTime {
   public:
    static constexpr std::int64_t kTicksPerMicro = 1'000'000;

    constexpr MicroTime() = default;

    static constexpr MicroTime fromTicks(std::int64_t ticks) {
      MicroTime t;
      t.ticks_ = ticks;
      return t;
    }

    /// Rounds to the nearest tick.
    static MicroTime fromMicros(double micros);

    constexpr std::int64_t ticks() const { return ticks_; }
    double micros() const {
      return static_cast<double>(ticks_) / static_cast<double>(kTicksPerMicro);
    }

    /// Exact decimal rendering, always six fractional digits.
    std::string str() const;

    constexpr MicroTime &operator+=(MicroTime o) {
      ticks_ += o.ticks_;
      return *this;
    }
    friend constexpr MicroTime operator+(MicroTime a, MicroTime b) {
      return fromTicks(a.ticks_ + b.ticks_);
    }
    friend constexpr MicroTime operator*(MicroTime a, std::int64_t n) {
      return fromTicks(a.ticks_ * n);
    }
    friend constexpr auto operator<=>(const MicroTime &, const MicroTime &) = default;

   private:
    std::int64_t ticks_ = 0;
  };

  /// Renders a scaled integer (value / scale) with exactly six decimals,
  /// rounding half away from zero. Works for any scale dividing into 1e6.
  std::string formatScaled(__int128 numerator, __int128 denominator);

}  // namespace pcsim
