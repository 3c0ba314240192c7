/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "pcsim/program_id.hpp"
#include "pcsim/types.hpp"

namespace pcsim::txn {

  using AccountId = std::uint64_t;
  using PrecompileId = std::uint32_t;

  struct Transaction {
    std::uint64_t sig = 0;
    Slot blockhash_ref = 0;
    std::vector<ProgramId> programs;
    /// Sorted, duplicate free.
    std::vector<AccountId> reads;
    /// Sorted, duplicate free, disjoint from reads.
    std::vector<AccountId> writes;
    std::uint64_t requested_cu = 0;
    bool is_vote = false;
    std::vector<PrecompileId> precompiles;
    std::uint64_t data_bytes = 0;

    /// Sorted/unique account lists that do not overlap.
    bool wellFormed() const;
    std::size_t lockCount() const { return reads.size() + writes.size(); }

    friend bool operator==(const Transaction &, const Transaction &) = default;
  };

  enum class TxError {
    // retryable
    AccountInUse,
    WouldExceedAccountDataBlockLimit,
    WouldExceedMaxBlockCostLimit,
    WouldExceedMaxAccountCostLimit,
    WouldExceedMaxVoteCostLimit,
    // fatal
    TooManyAccountLocks,
    BlockhashExpired,
    AlreadyProcessed,
    InvalidPrecompile,
    CuRequestTooLarge,
    InvalidProgramForExecution,
  };

  std::string_view toString(TxError e);
  bool isRetryable(TxError e);

  struct BlockLimits {
    std::uint64_t block_cu_limit = 48'000'000;
    std::uint64_t per_account_cu_limit = 12'000'000;
    std::uint64_t vote_cu_limit = 36'000'000;
    std::uint64_t account_data_limit_bytes = 100'000'000;
    std::uint64_t max_locks_per_tx = 64;
    std::uint64_t max_tx_cu = 1'400'000;
  };

  class SanitizedTransaction;

  /// Blockhash age, precompiles, compute request and lock count, checked in
  /// that order.
  std::variant<SanitizedTransaction, TxError> sanitize(
      Transaction tx, Slot current_slot,
      const std::set<PrecompileId> &enabled_precompiles,
      std::uint64_t max_blockhash_age, const BlockLimits &limits);

  /// Only sanitize() produces these.
  class SanitizedTransaction {
   public:
    const Transaction &tx() const { return tx_; }
    Slot sanitizedAt() const { return sanitized_at_; }

    friend bool operator==(const SanitizedTransaction &,
                           const SanitizedTransaction &) = default;

   private:
    friend std::variant<SanitizedTransaction, TxError> sanitize(
        Transaction, Slot, const std::set<PrecompileId> &, std::uint64_t,
        const BlockLimits &);

    SanitizedTransaction(Transaction tx, Slot at)
        : tx_(std::move(tx)), sanitized_at_(at) {}

    Transaction tx_;
    Slot sanitized_at_ = 0;
  };

  class TxnError : public std::runtime_error {
   public:
    enum class Code { NotHeld, NotReserved };

    TxnError(Code code, const std::string &what)
        : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

   private:
    Code code_;
  };

  /// Per-block cost accounting.
  class BlockBudget {
   public:
    explicit BlockBudget(BlockLimits limits = {}) : limits_(limits) {}

    std::optional<TxError> reserve(const SanitizedTransaction &tx);

    /// Replaces the reservation for tx by actual_cu (clamped to the reserved
    /// amount) and forgets it. actual_cu == 0 also returns the data bytes.
    void adjust(const SanitizedTransaction &tx, std::uint64_t actual_cu);

    bool hasReservation(std::uint64_t sig) const {
      return reservations_.contains(sig);
    }

    const BlockLimits &limits() const { return limits_; }
    std::uint64_t consumedCu() const { return consumed_cu_; }
    std::uint64_t consumedVoteCu() const { return consumed_vote_cu_; }
    std::uint64_t consumedDataBytes() const { return consumed_data_bytes_; }
    std::uint64_t consumedByAccount(AccountId a) const;

   private:
    struct Reservation {
      std::uint64_t cu;
      std::uint64_t data_bytes;
      bool is_vote;
      std::vector<AccountId> writes;
    };

    BlockLimits limits_;
    std::uint64_t consumed_cu_ = 0;
    std::uint64_t consumed_vote_cu_ = 0;
    std::uint64_t consumed_data_bytes_ = 0;
    std::unordered_map<AccountId, std::uint64_t> per_account_consumed_;
    std::unordered_map<std::uint64_t, Reservation> reservations_;
  };

  class AccountLockTable {
   public:
    /// All-or-nothing. Reads may overlap reads; writes overlap nothing.
    std::optional<TxError> tryLock(const SanitizedTransaction &tx);
    void unlock(const SanitizedTransaction &tx);

    std::uint64_t readCount(AccountId a) const;
    bool writeLocked(AccountId a) const { return write_locks_.contains(a); }
    bool empty() const { return read_locks_.empty() && write_locks_.empty(); }

    friend bool operator==(const AccountLockTable &a, const AccountLockTable &b) {
      return a.read_locks_ == b.read_locks_ && a.write_locks_ == b.write_locks_;
    }

   private:
    std::unordered_map<AccountId, std::uint64_t> read_locks_;
    std::unordered_set<AccountId> write_locks_;
    std::unordered_set<std::uint64_t> holders_;
  };

  class StatusCache {
   public:
    bool contains(std::uint64_t sig, Slot blockhash_ref) const {
      return processed_.contains({sig, blockhash_ref});
    }
    void insert(std::uint64_t sig, Slot blockhash_ref) {
      processed_.insert({sig, blockhash_ref});
    }
    std::size_t size() const { return processed_.size(); }

   private:
    std::set<std::pair<std::uint64_t, Slot>> processed_;
  };

  /// Only the age check; used when re-admitting queued transactions.
  bool blockhashExpired(const Transaction &tx, Slot current_slot,
                        std::uint64_t max_blockhash_age);

  std::optional<TxError> checkStatusCache(const SanitizedTransaction &tx,
                                          const StatusCache &cache);

  struct FormedBatch {
    std::vector<SanitizedTransaction> batch;
    std::vector<std::pair<SanitizedTransaction, TxError>> deferred;
  };

  /**
   * Scans the queue front to back and admits each transaction that passes the
   * status cache, lock and cost checks, until max_batch_size are admitted.
   * Admitted transactions keep their locks and cost reservations. Failed
   * transactions are reported in `deferred`; retryable ones are also
   * appended to the tail of the queue, fatal ones are dropped. Unscanned
   * transactions stay at the front of the queue in order.
   */
  FormedBatch formBatch(std::deque<SanitizedTransaction> &queue,
                        AccountLockTable &locks, BlockBudget &budget,
                        const StatusCache &status_cache,
                        std::size_t max_batch_size);

}  // namespace pcsim::txn
