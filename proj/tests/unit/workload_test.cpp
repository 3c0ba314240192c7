/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pcsim/builtins.hpp"
#include "pcsim/ledger.hpp"
#include "pcsim/workload.hpp"

using namespace pcsim;
using namespace pcsim::workload;

namespace {

  WorkloadError::Code errorOf(auto &&fn) {
    try {
      fn();
    } catch (const WorkloadError &e) {
      return e.code();
    }
    ADD_FAILURE() << "no WorkloadError thrown";
    return WorkloadError::Code::IoFailure;
  }

  std::vector<std::uint64_t> draw(std::uint64_t n, double s, std::size_t count,
                                  std::uint64_t seed) {
    ZipfSampler z(n, s);
    auto rng = makeRng(seed, 0);
    std::vector<std::uint64_t> counts(n);
    for (std::size_t i = 0; i < count; ++i) ++counts[z(rng)];
    return counts;
  }

  WorkloadConfig tiny() {
    WorkloadConfig c;
    c.seed = 9;
    c.slots = 40;
    c.num_programs = 50;
    c.num_accounts = 1000;
    c.txs_per_slot_mean = 20;
    c.fork_prob_per_slot = 0.3;
    c.root_lag = 4;
    c.vote_fraction = 0.25;
    c.num_voters = 10;
    c.invalid_program_fraction = 0.1;
    return c;
  }

  std::string serialize(const std::vector<TraceRecord> &records) {
    std::ostringstream out;
    writeTrace(records, out);
    return out.str();
  }

}  // namespace

TEST(Zipf, UniformWhenFlat) {
  const std::size_t draws = 100'000;
  auto counts = draw(4, 0.0, draws, 1);
  const double sigma = std::sqrt(0.25 * 0.75 / draws);
  for (auto c : counts) {
    EXPECT_LT(std::abs(static_cast<double>(c) / draws - 0.25), 3 * sigma);
  }
}

TEST(Zipf, SingletonDomain) {
  auto rng = makeRng(3, 0);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(zipfSample(rng, 1, 1.7), 0u);
}

TEST(Zipf, HarmonicThreeChiSquare) {
  const std::size_t draws = 100'000;
  const double expected[] = {6.0 / 11, 3.0 / 11, 2.0 / 11};
  ZipfSampler z(3, 1.0);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(z.probability(k), expected[k], 1e-12);

  auto counts = draw(3, 1.0, draws, 2);
  double chi2 = 0;
  for (int k = 0; k < 3; ++k) {
    const double e = expected[k] * draws;
    chi2 += (counts[k] - e) * (counts[k] - e) / e;
  }
  // 2 degrees of freedom, 0.1% level
  EXPECT_LT(chi2, 13.816);
}

TEST(Zipf, Errors) {
  auto rng = makeRng(1, 0);
  EXPECT_EQ(errorOf([&] { zipfSample(rng, 0, 1.0); }), WorkloadError::Code::EmptyDomain);
  EXPECT_EQ(errorOf([&] { ZipfSampler(3, -1.0); }), WorkloadError::Code::InvalidConfig);
}

TEST(GenSlotTxs, ZeroRate) {
  auto c = tiny();
  c.txs_per_slot_mean = 0;
  auto rng = makeRng(1, 3);
  auto programs = genPrograms(c, rng);
  ZipfSampler z(c.num_programs, c.zipf_s);
  EXPECT_TRUE(genSlotTxs(c, programs, z, rng, 1).empty());
}

TEST(GenSlotTxs, Deterministic) {
  auto c = tiny();
  auto once = [&] {
    auto rng = makeRng(c.seed, 3);
    auto programs = genPrograms(c, rng);
    ZipfSampler z(c.num_programs, c.zipf_s);
    return genSlotTxs(c, programs, z, rng, 5);
  };
  auto a = once();
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, once());
}

TEST(GenSlotTxs, SingleProgramAndWellFormed) {
  auto c = tiny();
  c.num_programs = 1;
  c.vote_fraction = 0;
  auto rng = makeRng(4, 3);
  auto programs = genPrograms(c, rng);
  ZipfSampler z(1, c.zipf_s);
  std::set<std::uint64_t> sigs;
  for (Slot slot = 1; slot < 20; ++slot) {
    for (const auto &tx : genSlotTxs(c, programs, z, rng, slot)) {
      ASSERT_EQ(tx.programs, std::vector{ProgramId::fromIndex(0)});
      EXPECT_EQ(tx.blockhash_ref, slot);
      EXPECT_TRUE(sigs.insert(tx.sig).second);
      for (auto r : tx.reads) {
        EXPECT_EQ(std::count(tx.writes.begin(), tx.writes.end(), r), 0);
      }
      auto n = tx.reads.size() + tx.writes.size();
      EXPECT_GE(n, c.accounts_per_tx_min);
      EXPECT_LE(n, c.accounts_per_tx_max);
      EXPECT_GE(tx.requested_cu, c.cu_min);
      EXPECT_LE(tx.requested_cu, c.cu_max);
    }
  }
}

TEST(GenSlotTxs, SanitizePassesForValidConfig) {
  auto c = tiny();
  auto records = generate(c);
  std::set<txn::PrecompileId> pre{1, 2, 3};
  std::size_t txs = 0;
  for (const auto &r : records) {
    if (const auto *t = std::get_if<TxRecord>(&r)) {
      ++txs;
      auto s = txn::sanitize(t->tx, t->slot, pre, 150, {});
      ASSERT_TRUE(std::holds_alternative<txn::SanitizedTransaction>(s));
      if (t->tx.is_vote) EXPECT_EQ(t->tx.programs, std::vector{builtins::vote()});
    }
  }
  EXPECT_GT(txs, 0u);
}

TEST(ForkSchedule, LinearChainRootsTrail) {
  auto c = tiny();
  c.fork_prob_per_slot = 0;
  c.slots = 20;
  c.root_lag = 5;
  auto rng = makeRng(1, 2);
  auto events = genForkSchedule(c, rng);
  Slot tip = 0;
  for (const auto &e : events) {
    if (const auto *s = std::get_if<SlotRecord>(&e)) {
      EXPECT_EQ(s->parent, tip);
      EXPECT_EQ(s->branch, Branch::Main);
      tip = s->slot;
    } else {
      EXPECT_EQ(std::get<RootRecord>(e).slot + 5, tip);
    }
  }
  EXPECT_EQ(tip, 20u);
}

TEST(ForkSchedule, EverySlotForked) {
  auto c = tiny();
  c.fork_prob_per_slot = 1.0;
  c.slots = 3;
  c.root_lag = 1;
  auto rng = makeRng(1, 2);
  auto events = genForkSchedule(c, rng);

  // Enumerated by hand: main 1,3,5 with siblings 2,4,6; roots 1 then 3.
  std::vector<ForkEvent> expected{
      SlotRecord{1, 0, Branch::Main}, SlotRecord{2, 0, Branch::Fork},
      SlotRecord{3, 1, Branch::Main}, SlotRecord{4, 1, Branch::Fork}, RootRecord{1},
      SlotRecord{5, 3, Branch::Main}, SlotRecord{6, 3, Branch::Fork}, RootRecord{3}};
  ASSERT_EQ(events, expected);

  ledger::ForkGraph g(0);
  std::vector<Slot> orphans;
  for (const auto &e : events) {
    if (const auto *s = std::get_if<SlotRecord>(&e)) {
      g.addSlot(s->slot, s->parent);
    } else {
      auto o = g.setRoot(std::get<RootRecord>(e).slot);
      orphans.insert(orphans.end(), o.begin(), o.end());
    }
  }
  EXPECT_EQ(orphans, (std::vector<Slot>{2, 4}));
  EXPECT_TRUE(g.contains(5));
  EXPECT_TRUE(g.contains(6));
}

TEST(ForkSchedule, RootNeverAdvancesWithLongLag) {
  auto c = tiny();
  c.root_lag = c.slots;
  auto rng = makeRng(1, 2);
  for (const auto &e : genForkSchedule(c, rng)) {
    EXPECT_TRUE(std::holds_alternative<SlotRecord>(e));
  }
}

TEST(ForkSchedule, AlwaysAppliesCleanly) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto c = tiny();
    auto rng = makeRng(seed, 2);
    c.fork_prob_per_slot = uniformUnit(rng);
    c.root_lag = uniformIndex(rng, 10);
    c.slots = 50;
    ledger::ForkGraph g(0);
    for (const auto &e : genForkSchedule(c, rng)) {
      if (const auto *s = std::get_if<SlotRecord>(&e)) {
        ASSERT_NO_THROW(g.addSlot(s->slot, s->parent)) << "seed " << seed;
      } else {
        ASSERT_NO_THROW(g.setRoot(std::get<RootRecord>(e).slot)) << "seed " << seed;
      }
    }
  }
}

TEST(Generate, ByteIdenticalAcrossRuns) {
  auto c = tiny();
  EXPECT_EQ(serialize(generate(c)), serialize(generate(c)));
  auto d = c;
  d.seed = 10;
  EXPECT_NE(serialize(generate(c)), serialize(generate(d)));
}

TEST(Trace, EmptyRoundTrip) {
  auto text = serialize({});
  std::istringstream in(text);
  auto back = loadTrace(in);
  EXPECT_TRUE(back.empty());
  EXPECT_EQ(serialize(back), text);
}

TEST(Trace, SeededRoundTrip) {
  auto records = generate(tiny());
  ASSERT_GE(records.size(), 1000u);
  records.resize(1000);
  auto text = serialize(records);
  std::istringstream in(text);
  auto back = loadTrace(in);
  EXPECT_EQ(back, records);
  EXPECT_EQ(serialize(back), text);
}

TEST(Trace, FileRoundTrip) {
  auto records = generate(tiny());
  auto path = std::filesystem::temp_directory_path() / "pcsim_workload_test.trace";
  writeTrace(records, path);
  EXPECT_EQ(loadTrace(path), records);
  std::filesystem::remove(path);
  EXPECT_EQ(errorOf([&] { loadTrace(path); }), WorkloadError::Code::IoFailure);
}

TEST(Trace, TruncatedIsMalformed) {
  auto text = serialize(generate(tiny()));
  for (std::size_t cut : {text.size() / 2, text.size() - 3, text.rfind('\n', text.size() - 2) + 1}) {
    std::istringstream in(text.substr(0, cut));
    try {
      loadTrace(in);
      FAIL() << "cut at " << cut;
    } catch (const WorkloadError &e) {
      EXPECT_EQ(e.code(), WorkloadError::Code::MalformedTrace);
      EXPECT_GT(e.line(), 0u);
    }
  }
}

TEST(Trace, GarbageLineReportsLineNumber) {
  auto text = serialize(generate(tiny()));
  std::size_t pos = 0;
  for (int i = 0; i < 6; ++i) pos = text.find('\n', pos) + 1;
  text.insert(pos, "bogus,1,2\n");
  std::istringstream in(text);
  try {
    loadTrace(in);
    FAIL();
  } catch (const WorkloadError &e) {
    EXPECT_EQ(e.code(), WorkloadError::Code::MalformedTrace);
    EXPECT_EQ(e.line(), 7u);
  }
}

TEST(WorkloadConfig, Validation) {
  auto bad = [](auto mutate) {
    auto c = tiny();
    mutate(c);
    return errorOf([&] { c.validate(); });
  };
  using C = WorkloadError::Code;
  EXPECT_EQ(bad([](auto &c) { c.num_programs = 0; }), C::InvalidConfig);
  EXPECT_EQ(bad([](auto &c) { c.zipf_s = -0.1; }), C::InvalidConfig);
  EXPECT_EQ(bad([](auto &c) { c.write_prob = 1.5; }), C::InvalidConfig);
  EXPECT_EQ(bad([](auto &c) { c.fork_prob_per_slot = -1; }), C::InvalidConfig);
  EXPECT_EQ(bad([](auto &c) { c.vote_fraction = 2; }), C::InvalidConfig);
  EXPECT_EQ(bad([](auto &c) { c.cu_min = c.cu_max + 1; }), C::InvalidConfig);
  EXPECT_EQ(bad([](auto &c) { c.accounts_per_tx_min = 9; c.accounts_per_tx_max = 3; }),
            C::InvalidConfig);
  EXPECT_EQ(bad([](auto &c) { c.txs_per_slot_mean = -1; }), C::InvalidConfig);
  EXPECT_NO_THROW(tiny().validate());
}
