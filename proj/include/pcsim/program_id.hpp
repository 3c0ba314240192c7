/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace pcsim {

  /// Opaque 32-byte program address.
  class ProgramId {
   public:
    static constexpr std::size_t kSize = 32;
    using Bytes = std::array<std::uint8_t, kSize>;

    constexpr ProgramId() = default;
    explicit constexpr ProgramId(const Bytes &bytes) : bytes_(bytes) {}

    /// Deterministic id for the n-th synthetic user program.
    static ProgramId fromIndex(std::uint64_t index);

    /// Id whose leading bytes spell `name`, zero padded. Used for builtins.
    static ProgramId fromName(std::string_view name);

    static std::optional<ProgramId> fromHex(std::string_view hex);
    std::string hex() const;

    const Bytes &bytes() const { return bytes_; }

    friend constexpr auto operator<=>(const ProgramId &, const ProgramId &) = default;

   private:
    Bytes bytes_{};
  };

}  // namespace pcsim

template <>
struct std::hash<pcsim::ProgramId> {
  std::size_t operator()(const pcsim::ProgramId &id) const noexcept {
    std::uint64_t h;
    std::memcpy(&h, id.bytes().data(), sizeof h);
    std::uint64_t tail;
    std::memcpy(&tail, id.bytes().data() + 24, sizeof tail);
    return static_cast<std::size_t>(h ^ (tail * 0x9e3779b97f4a7c15ULL));
  }
};
