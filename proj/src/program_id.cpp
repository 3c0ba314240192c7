/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pcsim/program_id.hpp"

#include "pcsim/rng.hpp"

namespace pcsim {

  ProgramId ProgramId::fromIndex(std::uint64_t index) {
    Bytes b{};
    std::uint64_t state = index ^ 0x70726f6772616d00ULL;
    for (std::size_t word = 0; word < kSize / 8; ++word) {
      std::uint64_t v = splitmix64(state);
      for (std::size_t i = 0; i < 8; ++i) {
        b[word * 8 + i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
      }
    }
    return ProgramId(b);
  }

  ProgramId ProgramId::fromName(std::string_view name) {
    Bytes b{};
    std::memcpy(b.data(), name.data(), std::min(name.size(), kSize));
    return ProgramId(b);
  }

  std::optional<ProgramId> ProgramId::fromHex(std::string_view hex) {
    if (hex.size() != kSize * 2) {
      return std::nullopt;
    }
    auto nibble = [](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      return -1;
    };
    Bytes b{};
    for (std::size_t i = 0; i < kSize; ++i) {
      int hi = nibble(hex[2 * i]);
      int lo = nibble(hex[2 * i + 1]);
      if (hi < 0 || lo < 0) {
        return std::nullopt;
      }
      b[i] = static_cast<std::uint8_t>(hi << 4 | lo);
    }
    return ProgramId(b);
  }

  std::string ProgramId::hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(kSize * 2, '0');
    for (std::size_t i = 0; i < kSize; ++i) {
      out[2 * i] = kDigits[bytes_[i] >> 4];
      out[2 * i + 1] = kDigits[bytes_[i] & 0xf];
    }
    return out;
  }

}  // namespace pcsim
