/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pcsim/ledger.hpp"
#include "pcsim/program_id.hpp"
#include "pcsim/rng.hpp"
#include "pcsim/types.hpp"

namespace pcsim::cache {

  enum class EntryState {
    Loaded,
    Builtin,
    Unloaded,
    FailedVerification,
    Closed,
    DelayVisibility,
  };

  std::string_view toString(EntryState s);

  /// Kind of a cache entry. Loaded entries carry the runtime environment
  /// version (epoch) they were compiled under.
  struct EntryKind {
    EntryState state = EntryState::Unloaded;
    std::uint64_t env_version = 0;

    static EntryKind loaded(std::uint64_t env) { return {EntryState::Loaded, env}; }
    static EntryKind builtin() { return {EntryState::Builtin, 0}; }
    static EntryKind unloaded() { return {EntryState::Unloaded, 0}; }
    static EntryKind failedVerification() {
      return {EntryState::FailedVerification, 0};
    }
    static EntryKind closed() { return {EntryState::Closed, 0}; }
    static EntryKind delayVisibility() { return {EntryState::DelayVisibility, 0}; }

    bool isExecutable() const {
      return state == EntryState::Loaded || state == EntryState::Builtin;
    }
    bool isTombstone() const {
      return state == EntryState::FailedVerification || state == EntryState::Closed
          || state == EntryState::DelayVisibility;
    }

    friend bool operator==(const EntryKind &, const EntryKind &) = default;
  };

  struct ProgramCacheEntry {
    ProgramId program_id;
    EntryKind kind;
    ProgramId account_owner;
    std::uint64_t account_size = 0;
    Slot deployment_slot = 0;
    Slot effective_slot = 0;
    std::uint64_t tx_usage_counter = 0;
    std::uint64_t ix_usage_counter = 0;
    Slot latest_access_slot = 0;
  };

  struct ProgramCacheStats {
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t evictions = 0;
    std::uint64_t insertions = 0;
    std::uint64_t loads = 0;
    std::uint64_t prunes = 0;
    MicroTime prune_time;

    friend bool operator==(const ProgramCacheStats &, const ProgramCacheStats &) = default;
  };

  struct CacheConfig {
    std::uint64_t capacity = 512;
    double eviction_fraction = 0.9;
    std::uint64_t slots_per_epoch = 432'000;

    /// floor(eviction_fraction * capacity)
    std::uint64_t evictionTarget() const;
    void validate() const;
  };

  /// Programs resolved for one transaction batch.
  struct BatchCache {
    Slot slot = 0;
    std::map<ProgramId, ProgramCacheEntry> resolved;
    /// Missing and now claimed by the requesting loader; each counted a miss.
    std::set<ProgramId> missing;
    /// Missing but claimed by another loader; wait and re-extract.
    std::set<ProgramId> awaited;

    std::uint64_t hits() const { return resolved.size(); }
  };

  enum class InsertOutcome { Inserted, Replaced, RejectedOlder };

  std::string_view toString(InsertOutcome o);

  /// One 2-random eviction step: the sampled pair and which one lost.
  struct EvictionRecord {
    ProgramId victim;
    Slot victim_deployment_slot = 0;
    std::uint64_t victim_tx_usage = 0;
    Slot victim_latest_access = 0;
    ProgramId other;
    Slot other_deployment_slot = 0;
    std::uint64_t other_tx_usage = 0;
    Slot other_latest_access = 0;
  };

  struct PruneReport {
    std::vector<ProgramCacheEntry> removed;
    std::vector<ProgramId> recompile_queue;
    std::size_t entries_scanned = 0;
    MicroTime elapsed;
  };

  class CacheError : public std::runtime_error {
   public:
    enum class Code {
      InvariantViolation,
      UnknownSlot,
      NotClaimHolder,
      NoSuchClaim,
      NotLoaded,
      NoSuchEntry,
      NonAdjacentEpoch,
    };

    CacheError(Code code, const std::string &what)
        : std::runtime_error(what), code_(code) {}

    Code code() const { return code_; }

   private:
    Code code_;
  };

  /**
   * Global, fork-aware cache of compiled programs.
   *
   * Each program id maps to a list of versions ordered by deployment slot. A
   * lookup for slot S picks the newest version whose deployment slot is S or
   * an ancestor of S and whose effective slot is not after S.
   *
   * Misses are claimed in a loading table so that only one loader works on a
   * given program; other requesters see the id as awaited and can block in
   * waitForLoad() until the claim holder calls finishLoad().
   *
   * Only Loaded entries count toward capacity. Builtins, Unloaded entries and
   * tombstones are never eviction candidates.
   *
   * All public members are thread safe.
   */
  class ProgramCache {
   public:
    explicit ProgramCache(CacheConfig config);

    const CacheConfig &config() const { return config_; }

    InsertOutcome insertEntry(ProgramCacheEntry entry);

    BatchCache extractForBatch(const std::set<ProgramId> &keys, Slot slot,
                               const ledger::ForkGraph &graph,
                               std::uint64_t loader_token);

    InsertOutcome finishLoad(const ProgramId &id, Slot slot,
                             ProgramCacheEntry outcome,
                             std::uint64_t loader_token);

    /// Blocks until no loader holds a claim on id.
    void waitForLoad(const ProgramId &id);

    std::vector<EvictionRecord> evictTwoRandom(Rng &rng);

    PruneReport prune(Slot new_root, const ledger::ForkGraph &graph,
                      Epoch now_epoch, MicroTime cost_per_entry);

    void onEpochBoundary(Epoch next_epoch);

    void unloadEntry(const ProgramId &id, Slot deployment_slot);

    /// Adds instruction invocations to a resolved entry's counter.
    void recordInstructionUsage(const ProgramId &id, Slot deployment_slot,
                                std::uint64_t count);

    ProgramCacheStats statsSnapshot() const;

    std::size_t loadedCount() const;
    std::size_t entryCount() const;
    std::uint64_t currentEnvironment() const;
    Slot latestRootSlot() const;
    Epoch latestRootEpoch() const;

    /// Copy of every version held for id, in deployment order.
    std::vector<ProgramCacheEntry> versions(const ProgramId &id) const;

    /// Ids with at least one entry, sorted.
    std::vector<ProgramId> programIds() const;

    std::vector<ProgramId> programsToRecompile() const;

   private:
    struct LoadingClaim {
      Slot slot;
      std::uint64_t token;
    };

    InsertOutcome insertLocked(ProgramCacheEntry entry);

    CacheConfig config_;
    mutable std::mutex mutex_;
    std::condition_variable loading_task_waiter_;
    std::unordered_map<ProgramId, std::vector<ProgramCacheEntry>> entries_;
    std::unordered_map<ProgramId, LoadingClaim> loading_entries_;
    std::vector<ProgramId> programs_to_recompile_;
    ProgramCacheStats stats_;
    std::size_t loaded_count_ = 0;
    std::uint64_t runtime_env_ = 0;
    Slot latest_root_slot_ = 0;
    Epoch latest_root_epoch_ = 0;
  };

}  // namespace pcsim::cache
