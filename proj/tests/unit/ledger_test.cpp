/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include <map>
#include <set>

#include "pcsim/ledger.hpp"
#include "pcsim/rng.hpp"

using namespace pcsim;
using ledger::ForkGraph;
using ledger::LedgerError;
using ledger::SlotRelationship;

namespace {

  ForkGraph chainWithFork() {
    ForkGraph g(0);
    g.addSlot(1, 0);
    g.addSlot(2, 1);
    g.addSlot(3, 1);
    return g;
  }

  LedgerError::Code errorOf(auto &&fn) {
    try {
      fn();
    } catch (const LedgerError &e) {
      return e.code();
    }
    ADD_FAILURE() << "no LedgerError thrown";
    return LedgerError::Code::UnknownSlot;
  }

  // Independent model: plain parent map and chain walks.
  struct ParentMap {
    std::map<Slot, Slot> parent;
    std::set<Slot> known{0};

    bool ancestorOrEqual(Slot a, Slot b) const {
      Slot cur = b;
      while (true) {
        if (cur == a) return true;
        auto it = parent.find(cur);
        if (it == parent.end()) return false;
        cur = it->second;
      }
    }

    SlotRelationship relationship(Slot a, Slot b) const {
      if (!known.contains(a) || !known.contains(b)) return SlotRelationship::Unknown;
      if (a == b) return SlotRelationship::Equal;
      if (ancestorOrEqual(a, b)) return SlotRelationship::Ancestor;
      if (ancestorOrEqual(b, a)) return SlotRelationship::Descendant;
      return SlotRelationship::Unrelated;
    }
  };

  void buildRandom(Rng &rng, std::size_t n, ForkGraph &g, ParentMap &m) {
    std::vector<Slot> slots{0};
    Slot next = 1;
    while (slots.size() < n) {
      Slot parent = slots[uniformIndex(rng, slots.size())];
      Slot child = std::max(next, parent + 1) + uniformIndex(rng, 3);
      if (m.known.contains(child)) {
        continue;
      }
      g.addSlot(child, parent);
      m.parent[child] = parent;
      m.known.insert(child);
      slots.push_back(child);
      next = std::max(next, child + 1);
    }
  }

}  // namespace

TEST(ForkGraph, AddSlotSingleEdge) {
  ForkGraph g(0);
  g.addSlot(1, 0);
  EXPECT_EQ(g.size(), 2u);
  EXPECT_EQ(g.parentOf(1), Slot{0});
  EXPECT_EQ(g.relationship(0, 1), SlotRelationship::Ancestor);
}

TEST(ForkGraph, ForkCoexists) {
  auto g = chainWithFork();
  EXPECT_EQ(g.parentOf(2), Slot{1});
  EXPECT_EQ(g.parentOf(3), Slot{1});
  EXPECT_EQ(g.relationship(1, 3), SlotRelationship::Ancestor);
  EXPECT_EQ(g.relationship(1, 2), SlotRelationship::Ancestor);
}

TEST(ForkGraph, AddSlotErrors) {
  auto g = chainWithFork();
  EXPECT_EQ(errorOf([&] { g.addSlot(2, 5); }), LedgerError::Code::UnknownParent);
  EXPECT_EQ(errorOf([&] { g.addSlot(3, 2); }), LedgerError::Code::DuplicateSlot);
  EXPECT_EQ(errorOf([&] { g.addSlot(4, 4); }), LedgerError::Code::UnknownParent);
  g.addSlot(10, 3);
  EXPECT_EQ(errorOf([&] { g.addSlot(9, 10); }), LedgerError::Code::NonMonotoneChild);
}

TEST(ForkGraph, RelationshipExamples) {
  auto g = chainWithFork();
  EXPECT_EQ(g.relationship(0, 2), SlotRelationship::Ancestor);
  EXPECT_EQ(g.relationship(2, 0), SlotRelationship::Descendant);
  EXPECT_EQ(g.relationship(2, 3), SlotRelationship::Unrelated);
  EXPECT_EQ(g.relationship(4, 4), SlotRelationship::Unknown);
  EXPECT_EQ(g.relationship(2, 2), SlotRelationship::Equal);
  EXPECT_EQ(g.relationship(2, 99), SlotRelationship::Unknown);
}

TEST(ForkGraph, SetRootOrphansSibling) {
  auto g = chainWithFork();
  EXPECT_EQ(g.setRoot(2), std::vector<Slot>{3});
  EXPECT_EQ(g.root(), 2u);
  EXPECT_FALSE(g.contains(3));
  EXPECT_EQ(g.relationship(3, 2), SlotRelationship::Unknown);
  // ancestors stay queryable
  EXPECT_EQ(g.relationship(0, 2), SlotRelationship::Ancestor);
}

TEST(ForkGraph, SetRootIdentity) {
  ForkGraph g(0);
  g.addSlot(1, 0);
  EXPECT_TRUE(g.setRoot(0).empty());
  EXPECT_EQ(g.size(), 2u);
}

TEST(ForkGraph, SetRootErrors) {
  auto g = chainWithFork();
  g.setRoot(2);
  EXPECT_EQ(errorOf([&] { g.setRoot(3); }), LedgerError::Code::UnknownSlot);

  auto h = chainWithFork();
  h.setRoot(2);
  h.addSlot(5, 2);
  EXPECT_EQ(errorOf([&] { h.setRoot(1); }), LedgerError::Code::RootNotDescendant);
  EXPECT_EQ(errorOf([&] { h.setRoot(42); }), LedgerError::Code::UnknownSlot);
  // a branch off a finalized ancestor can never descend from the root
  EXPECT_EQ(errorOf([&] { h.addSlot(6, 1); }), LedgerError::Code::RootNotDescendant);
}

TEST(Epoch, Examples) {
  EXPECT_EQ(ledger::epochOf(0, 32), 0u);
  EXPECT_EQ(ledger::epochOf(32, 32), 1u);
  EXPECT_EQ(ledger::epochOf(95, 32), 2u);
  EXPECT_EQ(errorOf([] { ledger::epochOf(5, 0); }), LedgerError::Code::ZeroEpochLength);
}

TEST(Epoch, NonDecreasing) {
  for (std::uint64_t spe : {1u, 7u, 32u}) {
    Epoch prev = 0;
    for (Slot s = 0; s < 500; ++s) {
      auto e = ledger::epochOf(s, spe);
      EXPECT_EQ(e, s / spe);
      EXPECT_GE(e, prev);
      prev = e;
    }
  }
}

TEST(ForkGraphProperty, RelationshipMatchesParentWalk) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto rng = makeRng(seed, 0);
    ForkGraph g(0);
    ParentMap m;
    buildRandom(rng, 2 + uniformIndex(rng, 29), g, m);
    for (Slot a : m.known) {
      for (Slot b : m.known) {
        ASSERT_EQ(g.relationship(a, b), m.relationship(a, b))
            << "seed " << seed << " a=" << a << " b=" << b;
        if (m.relationship(a, b) == SlotRelationship::Ancestor) {
          ASSERT_EQ(g.relationship(b, a), SlotRelationship::Descendant);
        }
      }
    }
  }
}

TEST(ForkGraphProperty, SetRootKeepsOnlyRelatedSlots) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto rng = makeRng(seed, 1);
    ForkGraph g(0);
    ParentMap m;
    buildRandom(rng, 2 + uniformIndex(rng, 29), g, m);

    std::vector<Slot> all(m.known.begin(), m.known.end());
    Slot root = all[uniformIndex(rng, all.size())];
    std::vector<Slot> expected;
    for (Slot s : all) {
      if (!m.ancestorOrEqual(s, root) && !m.ancestorOrEqual(root, s)) {
        expected.push_back(s);
      }
    }
    ASSERT_EQ(g.setRoot(root), expected) << "seed " << seed;
    for (Slot s : all) {
      bool orphan = std::find(expected.begin(), expected.end(), s) != expected.end();
      ASSERT_EQ(g.contains(s), !orphan);
      if (!orphan) {
        auto r = g.relationship(root, s);
        ASSERT_TRUE(r == SlotRelationship::Equal || r == SlotRelationship::Ancestor
                    || r == SlotRelationship::Descendant);
      }
    }
  }
}
