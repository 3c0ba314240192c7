/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "pcsim/ledger.hpp"
#include "pcsim/program_cache.hpp"
#include "pcsim/txn.hpp"
#include "pcsim/types.hpp"
#include "pcsim/workload.hpp"

namespace pcsim::exec {

  /// Program-cache time charged to a batch:
  ///   pc_time = per_batch_base + misses * per_miss_load + hits * per_hit
  struct LatencyModel {
    MicroTime per_miss_load = MicroTime::fromMicros(31782.734940);
    MicroTime per_batch_base = MicroTime::fromMicros(13348.645301);
    MicroTime per_hit;
    MicroTime prune_per_entry = MicroTime::fromMicros(0.25);

    MicroTime pcTime(std::uint64_t hits, std::uint64_t misses) const {
      return per_batch_base + per_miss_load * static_cast<std::int64_t>(misses)
           + per_hit * static_cast<std::int64_t>(hits);
    }
  };

  class ExecError : public std::runtime_error {
   public:
    enum class Code { DegenerateFit, SlotFrozen, UnresolvedProgram };

    ExecError(Code code, const std::string &what)
        : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

   private:
    Code code_;
  };

  /// Solves pc = base + misses * per_miss through two (mean misses, mean pc
  /// time) observations. per_hit is zero in the fitted model.
  LatencyModel fitLatencyModel(double mean_misses_a, double mean_pc_us_a,
                               double mean_misses_b, double mean_pc_us_b);

  struct BatchStats {
    Slot slot = 0;
    std::uint64_t batch_index = 0;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t evictions = 0;
    MicroTime pc_time;
    MicroTime prune_time;
    std::uint64_t executed_count = 0;
    std::uint64_t deferred_count = 0;
    std::uint64_t cu_consumed = 0;

    friend bool operator==(const BatchStats &, const BatchStats &) = default;
  };

  enum class OutcomeKind { Committed, Deferred, Dropped };

  struct TxOutcome {
    std::uint64_t sig = 0;
    Slot blockhash_ref = 0;
    OutcomeKind kind = OutcomeKind::Committed;
    std::uint64_t actual_cu = 0;
    std::optional<txn::TxError> error;
  };

  struct BatchResult {
    std::vector<TxOutcome> outcomes;

    std::size_t count(OutcomeKind k) const;
  };

  /// Stands in for reading program accounts: answers what a load of a given
  /// program produces under the current runtime environment.
  class ProgramLoader {
   public:
    ProgramLoader() = default;
    explicit ProgramLoader(const std::vector<workload::ProgramRecord> &programs);

    void add(const workload::ProgramRecord &program);

    /// Loaded for valid programs, FailedVerification for invalid ones and
    /// Closed for ids without a program account.
    cache::ProgramCacheEntry load(const ProgramId &id, Slot slot,
                                  std::uint64_t env_version) const;

    std::uint64_t loadCount() const { return loads_; }

   private:
    std::unordered_map<ProgramId, workload::ProgramRecord> programs_;
    mutable std::uint64_t loads_ = 0;
  };

  /// Inserts every builtin at deployment slot 0.
  void seedBuiltins(cache::ProgramCache &cache);

  struct Replenished {
    cache::BatchCache programs;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t evictions = 0;
    std::vector<cache::EvictionRecord> eviction_log;
  };

  /**
   * Resolves every program invoked by the batch. Missing programs are loaded
   * and inserted, programs claimed by another lane are waited for and
   * re-extracted, and an eviction pass runs if the cache grew past capacity.
   */
  Replenished replenishProgramCache(const std::vector<txn::SanitizedTransaction> &batch,
                                    cache::ProgramCache &cache,
                                    const ledger::ForkGraph &graph, Slot slot,
                                    std::uint64_t lane_token,
                                    const ProgramLoader &loader, Rng &eviction_rng);

  /// Committed(actual cu) for each transaction, or Dropped when an invoked
  /// program resolved to a tombstone. Also bumps instruction counters.
  std::pair<BatchResult, BatchStats> executeBatch(
      const std::vector<txn::SanitizedTransaction> &batch, const Replenished &programs,
      cache::ProgramCache &cache, const LatencyModel &model,
      double actual_cu_fraction = 1.0);

  /// Records committed transactions, settles cost reservations and releases
  /// every lock held by the batch.
  void commitBatch(const std::vector<txn::SanitizedTransaction> &batch,
                   const BatchResult &result, txn::StatusCache &status_cache,
                   txn::BlockBudget &budget, txn::AccountLockTable &locks);

  struct SlotSettings {
    std::size_t lanes = 4;
    std::size_t max_batch_size = 64;
    std::size_t max_batches_per_slot = 64;
    double actual_cu_fraction = 1.0;
    std::uint64_t max_blockhash_age = 150;
    std::set<txn::PrecompileId> enabled_precompiles{1, 2, 3};
    txn::BlockLimits limits;
  };

  /// Everything a slot needs beyond its own queue.
  struct ExecContext {
    cache::ProgramCache &cache;
    const ledger::ForkGraph &graph;
    txn::StatusCache &status_cache;
    const ProgramLoader &loader;
    const LatencyModel &model;
    const SlotSettings &settings;
    Rng &eviction_rng;
    /// Called once per executed batch, after commit.
    std::function<void(const std::vector<txn::SanitizedTransaction> &,
                       const BatchResult &, const BatchStats &)>
        on_batch;
    /// Prune time not yet charged to a batch; moved onto the next one.
    MicroTime *pending_prune = nullptr;
  };

  struct SlotReport {
    std::vector<BatchStats> batches;
    std::size_t expired = 0;
    /// Fatal failures: scheduling errors and tombstoned programs.
    std::size_t dropped = 0;
    /// Busy time per lane in virtual microseconds.
    std::vector<MicroTime> lane_time;
    std::uint64_t cu_committed = 0;
  };

  /**
   * Executes one bank. Expired transactions are dropped first; batches are
   * then formed, replenished, executed and committed one after another and
   * assigned to lanes round-robin until the queue drains, a formed batch
   * comes out empty (block budget exhausted), or max_batches_per_slot is
   * reached. Whatever is left stays queued.
   */
  SlotReport runSlot(Slot slot, std::deque<txn::SanitizedTransaction> &queue,
                     ExecContext &ctx);

  struct SimulatorConfig {
    cache::CacheConfig cache;
    SlotSettings slot;
    LatencyModel latency;
    std::uint64_t seed = 1;
  };

  /// arrivals = committed + dropped + rejected + expired + discarded
  ///            + queued_at_end
  struct RunTotals {
    std::uint64_t slots = 0;
    std::uint64_t arrivals = 0;
    std::uint64_t batches = 0;
    std::uint64_t committed = 0;
    std::uint64_t dropped = 0;
    std::uint64_t rejected = 0;
    std::uint64_t expired = 0;
    /// Fork-slot transactions left unexecuted when the fork slot ended.
    std::uint64_t discarded = 0;
    std::uint64_t queued_at_end = 0;
  };

  /**
   * Replays trace records through the ledger, pipeline and cache. Main-branch
   * slots share one persistent transaction queue; fork slots execute their
   * own transactions and discard leftovers. Root records re-root the fork
   * graph and prune the cache; the prune time is charged to the next batch.
   */
  class Simulator {
   public:
    using BatchObserver =
        std::function<void(Slot, const std::vector<txn::SanitizedTransaction> &,
                           const BatchResult &, const BatchStats &)>;

    explicit Simulator(SimulatorConfig config);

    void setBatchObserver(BatchObserver observer) { observer_ = std::move(observer); }

    void consume(const workload::TraceRecord &record);
    /// Runs any pending slot. Further consume() calls are still allowed.
    void flush();

    void run(const std::vector<workload::TraceRecord> &records);

    const std::vector<BatchStats> &batches() const { return batches_; }
    const cache::ProgramCache &cache() const { return cache_; }
    cache::ProgramCache &cache() { return cache_; }
    const ledger::ForkGraph &graph() const { return graph_; }
    const RunTotals &totals() const;
    const std::set<Slot> &frozenSlots() const { return frozen_; }

   private:
    struct PendingSlot {
      workload::SlotRecord record;
      std::vector<txn::Transaction> arrivals;
    };

    void executePending();

    SimulatorConfig config_;
    ledger::ForkGraph graph_;
    cache::ProgramCache cache_;
    txn::StatusCache status_cache_;
    ProgramLoader loader_;
    Rng eviction_rng_;
    std::deque<txn::SanitizedTransaction> main_queue_;
    std::optional<PendingSlot> pending_;
    MicroTime pending_prune_;
    std::vector<BatchStats> batches_;
    std::set<Slot> frozen_;
    BatchObserver observer_;
    mutable RunTotals totals_;
  };

}  // namespace pcsim::exec
