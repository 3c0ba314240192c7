/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "pcsim/types.hpp"

namespace pcsim::ledger {

  enum class SlotRelationship { Equal, Ancestor, Descendant, Unrelated, Unknown };

  std::string_view toString(SlotRelationship r);

  class LedgerError : public std::runtime_error {
   public:
    enum class Code {
      UnknownParent,
      DuplicateSlot,
      NonMonotoneChild,
      RootNotDescendant,
      UnknownSlot,
      ZeroEpochLength,
    };

    LedgerError(Code code, const std::string &what)
        : std::runtime_error(what), code_(code) {}

    Code code() const { return code_; }

   private:
    Code code_;
  };

  Epoch epochOf(Slot slot, std::uint64_t slots_per_epoch);

  /**
   * Slot parentage with a movable root.
   *
   * Children always carry a strictly larger slot number than their parent, so
   * the graph is acyclic by construction. Re-rooting drops every branch that
   * does not contain the new root but keeps the root's ancestor chain, so
   * queries against already-rooted history still resolve.
   *
   * Readers may run concurrently; addSlot/setRoot take an exclusive lock.
   */
  class ForkGraph {
   public:
    explicit ForkGraph(Slot genesis = 0);

    ForkGraph(const ForkGraph &other);
    ForkGraph &operator=(const ForkGraph &other);

    /// Parents below the root are rejected with RootNotDescendant.
    void addSlot(Slot child, Slot parent);

    SlotRelationship relationship(Slot a, Slot b) const;

    /// Moves the root forward and returns the orphaned slots in ascending
    /// order. The orphaned slots are removed from the graph.
    std::vector<Slot> setRoot(Slot new_root);

    bool contains(Slot s) const;
    Slot root() const;
    std::size_t size() const;
    std::vector<Slot> slots() const;

    /// Parent of s, or nothing for the genesis slot / unknown slots.
    std::optional<Slot> parentOf(Slot s) const;

   private:
    bool isAncestorOrEqualLocked(Slot a, Slot b) const;

    mutable std::shared_mutex mutex_;
    std::map<Slot, Slot> parent_of_;
    std::set<Slot> known_;
    Slot genesis_;
    Slot root_;
  };

}  // namespace pcsim::ledger
