/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <array>
#include <string_view>

#include "pcsim/program_id.hpp"

namespace pcsim::builtins {

  // Validator-distributed programs seeded into every cache at bank init.
  inline constexpr std::array<std::string_view, 8> kNames = {
      "system_program",        "vote_program",
      "stake_program",         "config_program",
      "compute_budget",        "address_lookup_table",
      "bpf_loader_upgradeable", "loader_v4",
  };

  inline ProgramId system() { return ProgramId::fromName(kNames[0]); }
  inline ProgramId vote() { return ProgramId::fromName(kNames[1]); }
  inline ProgramId loaderOwner() { return ProgramId::fromName(kNames[6]); }

}  // namespace pcsim::builtins
