/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "pcsim/txn.hpp"

using namespace pcsim;
using namespace pcsim::txn;

namespace {

  const std::set<PrecompileId> kPrecompiles{1, 2, 3};

  Transaction makeTx(std::uint64_t sig, std::vector<AccountId> reads,
                     std::vector<AccountId> writes, std::uint64_t cu = 1000) {
    Transaction tx;
    tx.sig = sig;
    tx.blockhash_ref = 100;
    tx.reads = std::move(reads);
    tx.writes = std::move(writes);
    tx.requested_cu = cu;
    tx.programs = {ProgramId::fromIndex(0)};
    return tx;
  }

  SanitizedTransaction ok(Transaction tx, Slot slot = 100,
                          const BlockLimits &limits = {}) {
    auto r = sanitize(std::move(tx), slot, kPrecompiles, 150, limits);
    return std::get<SanitizedTransaction>(r);
  }

  std::optional<TxError> errorOf(Transaction tx, Slot slot, const BlockLimits &limits = {}) {
    auto r = sanitize(std::move(tx), slot, kPrecompiles, 150, limits);
    if (auto *e = std::get_if<TxError>(&r)) return *e;
    return std::nullopt;
  }

  std::vector<std::uint64_t> sigs(const std::vector<SanitizedTransaction> &txs) {
    std::vector<std::uint64_t> out;
    for (const auto &t : txs) out.push_back(t.tx().sig);
    return out;
  }

}  // namespace

TEST(Sanitize, BlockhashExpired) {
  EXPECT_EQ(errorOf(makeTx(1, {}, {1}), 251), TxError::BlockhashExpired);
  EXPECT_EQ(errorOf(makeTx(1, {}, {1}), 250), std::nullopt);
}

TEST(Sanitize, TooManyLocks) {
  std::vector<AccountId> writes;
  for (AccountId a = 0; a < 65; ++a) writes.push_back(a);
  EXPECT_EQ(errorOf(makeTx(1, {}, writes), 100), TxError::TooManyAccountLocks);
  writes.pop_back();
  EXPECT_EQ(errorOf(makeTx(1, {}, writes), 100), std::nullopt);
  EXPECT_FALSE(isRetryable(TxError::TooManyAccountLocks));
}

TEST(Sanitize, PassEchoesTransaction) {
  auto tx = makeTx(9, {1, 2}, {3});
  auto s = ok(tx);
  EXPECT_EQ(s.tx(), tx);
  EXPECT_EQ(s.sanitizedAt(), 100u);
}

TEST(Sanitize, CheckOrder) {
  auto tx = makeTx(1, {}, {1}, 2'000'000);
  tx.precompiles = {9};
  // age first, then precompiles, then compute request
  EXPECT_EQ(errorOf(tx, 400), TxError::BlockhashExpired);
  EXPECT_EQ(errorOf(tx, 100), TxError::InvalidPrecompile);
  tx.precompiles = {2};
  EXPECT_EQ(errorOf(tx, 100), TxError::CuRequestTooLarge);
}

TEST(StatusCacheCheck, Examples) {
  StatusCache cache;
  auto a = ok(makeTx(5, {}, {1}));
  EXPECT_EQ(checkStatusCache(a, cache), std::nullopt);
  cache.insert(5, 100);
  EXPECT_EQ(checkStatusCache(a, cache), TxError::AlreadyProcessed);
  auto other_hash = makeTx(5, {}, {1});
  other_hash.blockhash_ref = 101;
  EXPECT_EQ(checkStatusCache(ok(other_hash, 101), cache), std::nullopt);
}

TEST(Locks, WriteWriteConflict) {
  AccountLockTable locks;
  EXPECT_EQ(locks.tryLock(ok(makeTx(1, {}, {7}))), std::nullopt);
  EXPECT_EQ(locks.tryLock(ok(makeTx(2, {}, {7}))), TxError::AccountInUse);
}

TEST(Locks, SharedReads) {
  AccountLockTable locks;
  EXPECT_EQ(locks.tryLock(ok(makeTx(1, {7}, {}))), std::nullopt);
  EXPECT_EQ(locks.tryLock(ok(makeTx(2, {7}, {}))), std::nullopt);
  EXPECT_EQ(locks.readCount(7), 2u);
}

TEST(Locks, WriteExcludesRead) {
  AccountLockTable locks;
  EXPECT_EQ(locks.tryLock(ok(makeTx(1, {}, {7}))), std::nullopt);
  EXPECT_EQ(locks.tryLock(ok(makeTx(3, {7}, {}))), TxError::AccountInUse);
  AccountLockTable reverse;
  EXPECT_EQ(reverse.tryLock(ok(makeTx(3, {7}, {}))), std::nullopt);
  EXPECT_EQ(reverse.tryLock(ok(makeTx(1, {}, {7}))), TxError::AccountInUse);
}

TEST(Locks, AllOrNothing) {
  AccountLockTable locks;
  locks.tryLock(ok(makeTx(1, {}, {5})));
  AccountLockTable before = locks;
  EXPECT_EQ(locks.tryLock(ok(makeTx(2, {1, 2}, {3, 5}))), TxError::AccountInUse);
  EXPECT_TRUE(locks == before);
}

TEST(Unlock, Examples) {
  AccountLockTable locks;
  auto t = ok(makeTx(1, {1, 2}, {3}));
  locks.tryLock(t);
  locks.unlock(t);
  EXPECT_TRUE(locks == AccountLockTable{});
  EXPECT_TRUE(locks.empty());

  auto r1 = ok(makeTx(2, {4}, {}));
  auto r2 = ok(makeTx(3, {4}, {}));
  locks.tryLock(r1);
  locks.tryLock(r2);
  locks.unlock(r1);
  EXPECT_EQ(locks.readCount(4), 1u);

  try {
    locks.unlock(r1);
    FAIL() << "expected NotHeld";
  } catch (const TxnError &e) {
    EXPECT_EQ(e.code(), TxnError::Code::NotHeld);
  }
}

TEST(Budget, BlockLimit) {
  BlockLimits limits;
  limits.block_cu_limit = 100;
  BlockBudget budget(limits);
  EXPECT_EQ(budget.reserve(ok(makeTx(1, {}, {1}, 60), 100, limits)), std::nullopt);
  EXPECT_EQ(budget.reserve(ok(makeTx(2, {}, {2}, 60), 100, limits)),
            TxError::WouldExceedMaxBlockCostLimit);
  EXPECT_EQ(budget.consumedCu(), 60u);
}

TEST(Budget, VoteLimitOnly) {
  BlockLimits limits;
  limits.vote_cu_limit = 3000;
  BlockBudget budget(limits);
  auto v1 = makeTx(1, {}, {1}, 2100);
  v1.is_vote = true;
  auto v2 = makeTx(2, {}, {2}, 2100);
  v2.is_vote = true;
  EXPECT_EQ(budget.reserve(ok(v1, 100, limits)), std::nullopt);
  EXPECT_EQ(budget.reserve(ok(v2, 100, limits)), TxError::WouldExceedMaxVoteCostLimit);
  EXPECT_EQ(budget.reserve(ok(makeTx(3, {}, {3}, 2100), 100, limits)), std::nullopt);
}

TEST(Budget, AccountAndDataLimits) {
  BlockLimits limits;
  limits.per_account_cu_limit = 100;
  limits.account_data_limit_bytes = 50;
  BlockBudget budget(limits);
  EXPECT_EQ(budget.reserve(ok(makeTx(1, {9}, {1}, 80), 100, limits)), std::nullopt);
  EXPECT_EQ(budget.reserve(ok(makeTx(2, {}, {1}, 30), 100, limits)),
            TxError::WouldExceedMaxAccountCostLimit);
  // reads do not count toward the per-account limit
  EXPECT_EQ(budget.reserve(ok(makeTx(3, {1}, {2}, 30), 100, limits)), std::nullopt);
  auto big = makeTx(4, {}, {5}, 10);
  big.data_bytes = 51;
  EXPECT_EQ(budget.reserve(ok(big, 100, limits)), TxError::WouldExceedAccountDataBlockLimit);
  EXPECT_EQ(budget.consumedByAccount(1), 80u);
}

TEST(Budget, ZeroCost) {
  BlockBudget budget;
  EXPECT_EQ(budget.reserve(ok(makeTx(1, {}, {1}, 0))), std::nullopt);
  EXPECT_EQ(budget.consumedCu(), 0u);
  EXPECT_EQ(budget.consumedByAccount(1), 0u);
}

TEST(Adjust, Examples) {
  BlockBudget budget;
  auto a = ok(makeTx(1, {}, {1}, 60));
  budget.reserve(a);
  budget.adjust(a, 40);
  EXPECT_EQ(budget.consumedCu(), 40u);
  EXPECT_EQ(budget.consumedByAccount(1), 40u);

  auto b = makeTx(2, {}, {2}, 60);
  b.data_bytes = 10;
  auto sb = ok(b);
  budget.reserve(sb);
  budget.adjust(sb, 0);
  EXPECT_EQ(budget.consumedCu(), 40u);
  EXPECT_EQ(budget.consumedDataBytes(), 0u);

  auto c = ok(makeTx(3, {}, {3}, 25));
  budget.reserve(c);
  budget.adjust(c, 25);
  EXPECT_EQ(budget.consumedCu(), 65u);

  auto d = ok(makeTx(4, {}, {4}, 10));
  budget.reserve(d);
  budget.adjust(d, 500);  // clamped to the reservation
  EXPECT_EQ(budget.consumedCu(), 75u);

  try {
    budget.adjust(d, 1);
    FAIL() << "expected NotReserved";
  } catch (const TxnError &e) {
    EXPECT_EQ(e.code(), TxnError::Code::NotReserved);
  }
}

TEST(FormBatch, LockingRules) {
  std::deque<SanitizedTransaction> queue{ok(makeTx(1, {}, {10})), ok(makeTx(2, {}, {10})),
                                         ok(makeTx(3, {10}, {})), ok(makeTx(4, {11}, {}))};
  AccountLockTable locks;
  BlockBudget budget;
  StatusCache status;
  auto formed = formBatch(queue, locks, budget, status, 64);
  EXPECT_EQ(sigs(formed.batch), (std::vector<std::uint64_t>{1, 4}));
  ASSERT_EQ(formed.deferred.size(), 2u);
  EXPECT_EQ(formed.deferred[0].first.tx().sig, 2u);
  EXPECT_EQ(formed.deferred[0].second, TxError::AccountInUse);
  EXPECT_EQ(formed.deferred[1].first.tx().sig, 3u);
  EXPECT_EQ(formed.deferred[1].second, TxError::AccountInUse);
  // retryables go back to the tail
  ASSERT_EQ(queue.size(), 2u);
  EXPECT_EQ(queue[0].tx().sig, 2u);
  EXPECT_EQ(queue[1].tx().sig, 3u);
}

TEST(FormBatch, EmptyQueue) {
  std::deque<SanitizedTransaction> queue;
  AccountLockTable locks;
  BlockBudget budget;
  StatusCache status;
  auto formed = formBatch(queue, locks, budget, status, 64);
  EXPECT_TRUE(formed.batch.empty());
  EXPECT_TRUE(formed.deferred.empty());
}

TEST(FormBatch, SizeCap) {
  std::deque<SanitizedTransaction> queue;
  for (std::uint64_t i = 0; i < 10; ++i) queue.push_back(ok(makeTx(i, {}, {i})));
  AccountLockTable locks;
  BlockBudget budget;
  StatusCache status;
  auto formed = formBatch(queue, locks, budget, status, 4);
  EXPECT_EQ(sigs(formed.batch), (std::vector<std::uint64_t>{0, 1, 2, 3}));
  ASSERT_EQ(queue.size(), 6u);
  EXPECT_EQ(queue.front().tx().sig, 4u);
}

TEST(FormBatch, FatalDroppedAndCostFailureReleasesLocks) {
  BlockLimits limits;
  limits.block_cu_limit = 100;
  std::deque<SanitizedTransaction> queue{ok(makeTx(1, {}, {1}, 10), 100, limits),
                                         ok(makeTx(2, {}, {2}, 120), 100, limits),
                                         ok(makeTx(3, {}, {2}, 10), 100, limits)};
  AccountLockTable locks;
  BlockBudget budget(limits);
  StatusCache status;
  status.insert(1, 100);
  auto formed = formBatch(queue, locks, budget, status, 64);
  EXPECT_EQ(sigs(formed.batch), std::vector<std::uint64_t>{3});
  ASSERT_EQ(formed.deferred.size(), 2u);
  EXPECT_EQ(formed.deferred[0].second, TxError::AlreadyProcessed);
  EXPECT_EQ(formed.deferred[1].second, TxError::WouldExceedMaxBlockCostLimit);
  ASSERT_EQ(queue.size(), 1u);
  EXPECT_EQ(queue.front().tx().sig, 2u);
  EXPECT_FALSE(locks.writeLocked(1));
  EXPECT_TRUE(locks.writeLocked(2));
}

TEST(FormBatchProperty, PairwiseConflictFree) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto rng = makeRng(seed, 20);
    std::deque<SanitizedTransaction> queue;
    for (std::uint64_t i = 0; i < 300; ++i) {
      std::set<AccountId> accts;
      const auto n = 1 + uniformIndex(rng, 5);
      while (accts.size() < n) accts.insert(uniformIndex(rng, 40));
      std::vector<AccountId> reads;
      std::vector<AccountId> writes;
      for (auto a : accts) (uniformIndex(rng, 2) ? writes : reads).push_back(a);
      queue.push_back(ok(makeTx(i, reads, writes, 1 + uniformIndex(rng, 5000))));
    }
    BlockLimits limits;
    limits.block_cu_limit = 200'000;
    limits.per_account_cu_limit = 40'000;
    AccountLockTable locks;
    BlockBudget budget(limits);
    StatusCache status;
    while (true) {
      auto formed = formBatch(queue, locks, budget, status, 16);
      if (formed.batch.empty()) break;
      for (std::size_t i = 0; i < formed.batch.size(); ++i) {
        for (std::size_t j = i + 1; j < formed.batch.size(); ++j) {
          ASSERT_FALSE(oracle::accountsOverlap(formed.batch[i].tx(), formed.batch[j].tx()))
              << "seed " << seed;
        }
      }
      for (const auto &t : formed.batch) {
        budget.adjust(t, t.tx().requested_cu);
        status.insert(t.tx().sig, t.tx().blockhash_ref);
        locks.unlock(t);
      }
      ASSERT_LE(budget.consumedCu(), limits.block_cu_limit);
    }
    EXPECT_TRUE(locks.empty());
  }
}
