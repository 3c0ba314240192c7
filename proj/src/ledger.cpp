/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pcsim/ledger.hpp"

#include <mutex>
#include <optional>
#include <string>

namespace pcsim::ledger {

  std::string_view toString(SlotRelationship r) {
    switch (r) {
      case SlotRelationship::Equal:
        return "Equal";
      case SlotRelationship::Ancestor:
        return "Ancestor";
      case SlotRelationship::Descendant:
        return "Descendant";
      case SlotRelationship::Unrelated:
        return "Unrelated";
      case SlotRelationship::Unknown:
        return "Unknown";
    }
    return "?";
  }

  Epoch epochOf(Slot slot, std::uint64_t slots_per_epoch) {
    if (slots_per_epoch == 0) {
      throw LedgerError(LedgerError::Code::ZeroEpochLength,
                        "slots_per_epoch must be positive");
    }
    return slot / slots_per_epoch;
  }

  ForkGraph::ForkGraph(Slot genesis) : genesis_(genesis), root_(genesis) {
    known_.insert(genesis);
  }

  ForkGraph::ForkGraph(const ForkGraph &other) {
    std::shared_lock lock(other.mutex_);
    parent_of_ = other.parent_of_;
    known_ = other.known_;
    genesis_ = other.genesis_;
    root_ = other.root_;
  }

  ForkGraph &ForkGraph::operator=(const ForkGraph &other) {
    if (this != &other) {
      ForkGraph copy(other);
      std::unique_lock lock(mutex_);
      parent_of_ = std::move(copy.parent_of_);
      known_ = std::move(copy.known_);
      genesis_ = copy.genesis_;
      root_ = copy.root_;
    }
    return *this;
  }

  void ForkGraph::addSlot(Slot child, Slot parent) {
    std::unique_lock lock(mutex_);
    if (!known_.contains(parent)) {
      throw LedgerError(LedgerError::Code::UnknownParent,
                        "unknown parent slot " + std::to_string(parent));
    }
    if (known_.contains(child)) {
      throw LedgerError(LedgerError::Code::DuplicateSlot,
                        "slot " + std::to_string(child) + " already known");
    }
    if (child <= parent) {
      throw LedgerError(LedgerError::Code::NonMonotoneChild,
                        "child slot " + std::to_string(child)
                            + " not above parent " + std::to_string(parent));
    }
    if (parent < root_) {
      throw LedgerError(LedgerError::Code::RootNotDescendant,
                        "parent " + std::to_string(parent)
                            + " is finalized below root " + std::to_string(root_));
    }
    known_.insert(child);
    parent_of_.emplace(child, parent);
  }

  // Every known slot at or below the root lies on the root's ancestor chain,
  // and every known slot above the root descends from it. Walks therefore
  // stop at the root instead of following the chain back to genesis.
  bool ForkGraph::isAncestorOrEqualLocked(Slot a, Slot b) const {
    if (a == b) {
      return true;
    }
    if (a > b) {
      return false;
    }
    if (a <= root_) {
      // a is on the root chain; b descends from a iff b is on the root chain
      // or above the root.
      return true;
    }
    Slot cur = b;
    while (cur > a) {
      auto it = parent_of_.find(cur);
      if (it == parent_of_.end()) {
        return false;
      }
      cur = it->second;
    }
    return cur == a;
  }

  SlotRelationship ForkGraph::relationship(Slot a, Slot b) const {
    std::shared_lock lock(mutex_);
    if (!known_.contains(a) || !known_.contains(b)) {
      return SlotRelationship::Unknown;
    }
    if (a == b) {
      return SlotRelationship::Equal;
    }
    if (isAncestorOrEqualLocked(a, b)) {
      return SlotRelationship::Ancestor;
    }
    if (isAncestorOrEqualLocked(b, a)) {
      return SlotRelationship::Descendant;
    }
    return SlotRelationship::Unrelated;
  }

  std::vector<Slot> ForkGraph::setRoot(Slot new_root) {
    std::unique_lock lock(mutex_);
    if (!known_.contains(new_root)) {
      throw LedgerError(LedgerError::Code::UnknownSlot,
                        "unknown slot " + std::to_string(new_root));
    }
    if (!isAncestorOrEqualLocked(root_, new_root)) {
      throw LedgerError(LedgerError::Code::RootNotDescendant,
                        "slot " + std::to_string(new_root)
                            + " does not descend from root "
                            + std::to_string(root_));
    }
    if (new_root == root_) {
      return {};
    }

    // Only slots above the old root can be off the new root's lineage.
    std::vector<Slot> orphaned;
    for (auto it = known_.upper_bound(root_); it != known_.end(); ++it) {
      Slot s = *it;
      bool keep = s <= new_root ? isAncestorOrEqualLocked(s, new_root)
                                : isAncestorOrEqualLocked(new_root, s);
      if (!keep) {
        orphaned.push_back(s);
      }
    }
    for (Slot s : orphaned) {
      known_.erase(s);
      parent_of_.erase(s);
    }
    root_ = new_root;
    return orphaned;
  }

  bool ForkGraph::contains(Slot s) const {
    std::shared_lock lock(mutex_);
    return known_.contains(s);
  }

  Slot ForkGraph::root() const {
    std::shared_lock lock(mutex_);
    return root_;
  }

  std::size_t ForkGraph::size() const {
    std::shared_lock lock(mutex_);
    return known_.size();
  }

  std::vector<Slot> ForkGraph::slots() const {
    std::shared_lock lock(mutex_);
    return {known_.begin(), known_.end()};
  }

  std::optional<Slot> ForkGraph::parentOf(Slot s) const {
    std::shared_lock lock(mutex_);
    auto it = parent_of_.find(s);
    if (it == parent_of_.end()) {
      return std::nullopt;
    }
    return it->second;
  }

}  // namespace pcsim::ledger
