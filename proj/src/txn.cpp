/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pcsim/txn.hpp"

#include <algorithm>
#include <string>

namespace pcsim::txn {

  bool Transaction::wellFormed() const {
    auto sorted_unique = [](const std::vector<AccountId> &v) {
      return std::adjacent_find(v.begin(), v.end(),
                                [](AccountId a, AccountId b) { return a >= b; })
          == v.end();
    };
    if (!sorted_unique(reads) || !sorted_unique(writes)) {
      return false;
    }
    std::vector<AccountId> common;
    std::set_intersection(reads.begin(), reads.end(), writes.begin(),
                          writes.end(), std::back_inserter(common));
    return common.empty();
  }

  std::string_view toString(TxError e) {
    switch (e) {
      case TxError::AccountInUse:
        return "AccountInUse";
      case TxError::WouldExceedAccountDataBlockLimit:
        return "WouldExceedAccountDataBlockLimit";
      case TxError::WouldExceedMaxBlockCostLimit:
        return "WouldExceedMaxBlockCostLimit";
      case TxError::WouldExceedMaxAccountCostLimit:
        return "WouldExceedMaxAccountCostLimit";
      case TxError::WouldExceedMaxVoteCostLimit:
        return "WouldExceedMaxVoteCostLimit";
      case TxError::TooManyAccountLocks:
        return "TooManyAccountLocks";
      case TxError::BlockhashExpired:
        return "BlockhashExpired";
      case TxError::AlreadyProcessed:
        return "AlreadyProcessed";
      case TxError::InvalidPrecompile:
        return "InvalidPrecompile";
      case TxError::CuRequestTooLarge:
        return "CuRequestTooLarge";
      case TxError::InvalidProgramForExecution:
        return "InvalidProgramForExecution";
    }
    return "?";
  }

  bool isRetryable(TxError e) {
    switch (e) {
      case TxError::AccountInUse:
      case TxError::WouldExceedAccountDataBlockLimit:
      case TxError::WouldExceedMaxBlockCostLimit:
      case TxError::WouldExceedMaxAccountCostLimit:
      case TxError::WouldExceedMaxVoteCostLimit:
        return true;
      default:
        return false;
    }
  }

  bool blockhashExpired(const Transaction &tx, Slot current_slot,
                        std::uint64_t max_blockhash_age) {
    return current_slot > tx.blockhash_ref
        && current_slot - tx.blockhash_ref > max_blockhash_age;
  }

  std::variant<SanitizedTransaction, TxError> sanitize(
      Transaction tx, Slot current_slot,
      const std::set<PrecompileId> &enabled_precompiles,
      std::uint64_t max_blockhash_age, const BlockLimits &limits) {
    if (blockhashExpired(tx, current_slot, max_blockhash_age)) {
      return TxError::BlockhashExpired;
    }
    for (auto p : tx.precompiles) {
      if (!enabled_precompiles.contains(p)) {
        return TxError::InvalidPrecompile;
      }
    }
    if (tx.requested_cu > limits.max_tx_cu) {
      return TxError::CuRequestTooLarge;
    }
    if (tx.lockCount() > limits.max_locks_per_tx) {
      return TxError::TooManyAccountLocks;
    }
    return SanitizedTransaction(std::move(tx), current_slot);
  }

  std::optional<TxError> checkStatusCache(const SanitizedTransaction &tx,
                                          const StatusCache &cache) {
    if (cache.contains(tx.tx().sig, tx.tx().blockhash_ref)) {
      return TxError::AlreadyProcessed;
    }
    return std::nullopt;
  }

  std::optional<TxError> BlockBudget::reserve(const SanitizedTransaction &stx) {
    const auto &tx = stx.tx();
    const auto cu = tx.requested_cu;
    if (consumed_cu_ + cu > limits_.block_cu_limit) {
      return TxError::WouldExceedMaxBlockCostLimit;
    }
    if (tx.is_vote && consumed_vote_cu_ + cu > limits_.vote_cu_limit) {
      return TxError::WouldExceedMaxVoteCostLimit;
    }
    for (auto a : tx.writes) {
      if (consumedByAccount(a) + cu > limits_.per_account_cu_limit) {
        return TxError::WouldExceedMaxAccountCostLimit;
      }
    }
    if (consumed_data_bytes_ + tx.data_bytes > limits_.account_data_limit_bytes) {
      return TxError::WouldExceedAccountDataBlockLimit;
    }

    consumed_cu_ += cu;
    if (tx.is_vote) {
      consumed_vote_cu_ += cu;
    }
    if (cu > 0) {
      for (auto a : tx.writes) {
        per_account_consumed_[a] += cu;
      }
    }
    consumed_data_bytes_ += tx.data_bytes;
    reservations_[tx.sig] = Reservation{cu, tx.data_bytes, tx.is_vote, tx.writes};
    return std::nullopt;
  }

  void BlockBudget::adjust(const SanitizedTransaction &stx,
                           std::uint64_t actual_cu) {
    auto it = reservations_.find(stx.tx().sig);
    if (it == reservations_.end()) {
      throw TxnError(TxnError::Code::NotReserved,
                     "no reservation for sig " + std::to_string(stx.tx().sig));
    }
    const auto &r = it->second;
    const auto refund = r.cu - std::min(actual_cu, r.cu);
    consumed_cu_ -= refund;
    if (r.is_vote) {
      consumed_vote_cu_ -= refund;
    }
    if (refund > 0) {
      for (auto a : r.writes) {
        auto acc = per_account_consumed_.find(a);
        acc->second -= refund;
        if (acc->second == 0) {
          per_account_consumed_.erase(acc);
        }
      }
    }
    if (actual_cu == 0) {
      consumed_data_bytes_ -= r.data_bytes;
    }
    reservations_.erase(it);
  }

  std::uint64_t BlockBudget::consumedByAccount(AccountId a) const {
    auto it = per_account_consumed_.find(a);
    return it == per_account_consumed_.end() ? 0 : it->second;
  }

  std::optional<TxError> AccountLockTable::tryLock(const SanitizedTransaction &stx) {
    const auto &tx = stx.tx();
    for (auto a : tx.writes) {
      if (write_locks_.contains(a) || read_locks_.contains(a)) {
        return TxError::AccountInUse;
      }
    }
    for (auto a : tx.reads) {
      if (write_locks_.contains(a)) {
        return TxError::AccountInUse;
      }
    }
    for (auto a : tx.writes) {
      write_locks_.insert(a);
    }
    for (auto a : tx.reads) {
      ++read_locks_[a];
    }
    holders_.insert(tx.sig);
    return std::nullopt;
  }

  void AccountLockTable::unlock(const SanitizedTransaction &stx) {
    const auto &tx = stx.tx();
    if (holders_.erase(tx.sig) == 0) {
      throw TxnError(TxnError::Code::NotHeld,
                     "sig " + std::to_string(tx.sig) + " holds no locks");
    }
    for (auto a : tx.writes) {
      write_locks_.erase(a);
    }
    for (auto a : tx.reads) {
      auto it = read_locks_.find(a);
      if (--it->second == 0) {
        read_locks_.erase(it);
      }
    }
  }

  std::uint64_t AccountLockTable::readCount(AccountId a) const {
    auto it = read_locks_.find(a);
    return it == read_locks_.end() ? 0 : it->second;
  }

  FormedBatch formBatch(std::deque<SanitizedTransaction> &queue,
                        AccountLockTable &locks, BlockBudget &budget,
                        const StatusCache &status_cache,
                        std::size_t max_batch_size) {
    FormedBatch out;
    std::vector<SanitizedTransaction> retry;
    while (!queue.empty() && out.batch.size() < max_batch_size) {
      SanitizedTransaction tx = std::move(queue.front());
      queue.pop_front();

      std::optional<TxError> err = checkStatusCache(tx, status_cache);
      if (!err) {
        err = locks.tryLock(tx);
        if (!err) {
          err = budget.reserve(tx);
          if (err) {
            locks.unlock(tx);
          }
        }
      }

      if (!err) {
        out.batch.push_back(std::move(tx));
        continue;
      }
      if (isRetryable(*err)) {
        retry.push_back(tx);
      }
      out.deferred.emplace_back(std::move(tx), *err);
    }
    for (auto &tx : retry) {
      queue.push_back(std::move(tx));
    }
    return out;
  }

}  // namespace pcsim::txn
