/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pcsim/program_cache.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pcsim::cache {

  std::string_view toString(EntryState s) {
    switch (s) {
      case EntryState::Loaded:
        return "Loaded";
      case EntryState::Builtin:
        return "Builtin";
      case EntryState::Unloaded:
        return "Unloaded";
      case EntryState::FailedVerification:
        return "FailedVerification";
      case EntryState::Closed:
        return "Closed";
      case EntryState::DelayVisibility:
        return "DelayVisibility";
    }
    return "?";
  }

  std::string_view toString(InsertOutcome o) {
    switch (o) {
      case InsertOutcome::Inserted:
        return "Inserted";
      case InsertOutcome::Replaced:
        return "Replaced";
      case InsertOutcome::RejectedOlder:
        return "RejectedOlder";
    }
    return "?";
  }

  std::uint64_t CacheConfig::evictionTarget() const {
    return static_cast<std::uint64_t>(
        std::floor(eviction_fraction * static_cast<double>(capacity)));
  }

  void CacheConfig::validate() const {
    if (capacity == 0) {
      throw std::invalid_argument("cache capacity must be positive");
    }
    if (!(eviction_fraction > 0.0 && eviction_fraction <= 1.0)) {
      throw std::invalid_argument("eviction_fraction must be in (0, 1]");
    }
    if (slots_per_epoch == 0) {
      throw std::invalid_argument("slots_per_epoch must be positive");
    }
  }

  namespace {

    // Whether `next` may take the place of `current` at the same deployment
    // slot.
    bool supersedes(const EntryKind &next, const EntryKind &current) {
      switch (next.state) {
        case EntryState::Loaded:
          return current.state == EntryState::Unloaded
              || (current.state == EntryState::Loaded
                  && next.env_version > current.env_version);
        case EntryState::FailedVerification:
        case EntryState::Closed:
        case EntryState::DelayVisibility:
          return current.state == EntryState::Unloaded;
        case EntryState::Builtin:
        case EntryState::Unloaded:
          return false;
      }
      return false;
    }

    bool countsTowardCapacity(const EntryKind &k) {
      return k.state == EntryState::Loaded;
    }

  }  // namespace

  ProgramCache::ProgramCache(CacheConfig config) : config_(config) {
    config_.validate();
  }

  InsertOutcome ProgramCache::insertEntry(ProgramCacheEntry entry) {
    std::lock_guard lock(mutex_);
    return insertLocked(std::move(entry));
  }

  InsertOutcome ProgramCache::insertLocked(ProgramCacheEntry entry) {
    if (entry.kind.state == EntryState::Builtin) {
      entry.deployment_slot = 0;
      entry.effective_slot = 0;
    }
    if (entry.effective_slot < entry.deployment_slot) {
      throw CacheError(CacheError::Code::InvariantViolation,
                       "effective slot " + std::to_string(entry.effective_slot)
                           + " precedes deployment slot "
                           + std::to_string(entry.deployment_slot));
    }

    auto &list = entries_[entry.program_id];
    auto pos = std::lower_bound(
        list.begin(), list.end(), entry.deployment_slot,
        [](const ProgramCacheEntry &e, Slot s) { return e.deployment_slot < s; });

    if (pos != list.end() && pos->deployment_slot == entry.deployment_slot) {
      if (!supersedes(entry.kind, pos->kind)) {
        return InsertOutcome::RejectedOlder;
      }
      // Usage statistics survive unload/reload and recompilation.
      entry.tx_usage_counter += pos->tx_usage_counter;
      entry.ix_usage_counter += pos->ix_usage_counter;
      entry.latest_access_slot =
          std::max(entry.latest_access_slot, pos->latest_access_slot);
      if (countsTowardCapacity(pos->kind)) {
        --loaded_count_;
      }
      if (countsTowardCapacity(entry.kind)) {
        ++loaded_count_;
      }
      *pos = std::move(entry);
      ++stats_.insertions;
      return InsertOutcome::Replaced;
    }

    if (countsTowardCapacity(entry.kind)) {
      ++loaded_count_;
    }
    list.insert(pos, std::move(entry));
    ++stats_.insertions;
    return InsertOutcome::Inserted;
  }

  BatchCache ProgramCache::extractForBatch(const std::set<ProgramId> &keys,
                                           Slot slot,
                                           const ledger::ForkGraph &graph,
                                           std::uint64_t loader_token) {
    if (!graph.contains(slot)) {
      throw CacheError(CacheError::Code::UnknownSlot,
                       "extract for unknown slot " + std::to_string(slot));
    }

    BatchCache out;
    out.slot = slot;

    std::lock_guard lock(mutex_);
    for (const auto &key : keys) {
      ProgramCacheEntry *selected = nullptr;
      if (auto it = entries_.find(key); it != entries_.end()) {
        auto &list = it->second;
        for (auto e = list.rbegin(); e != list.rend(); ++e) {
          if (e->effective_slot > slot) {
            continue;
          }
          if (e->kind.state == EntryState::Builtin) {
            selected = &*e;
            break;
          }
          auto rel = graph.relationship(e->deployment_slot, slot);
          if (rel == ledger::SlotRelationship::Equal
              || rel == ledger::SlotRelationship::Ancestor) {
            selected = &*e;
            break;
          }
        }
      }

      if (selected != nullptr) {
        const auto &kind = selected->kind;
        bool fresh = kind.state == EntryState::Builtin
                  || (kind.state == EntryState::Loaded
                      && kind.env_version >= runtime_env_);
        if (fresh) {
          ++selected->tx_usage_counter;
          selected->latest_access_slot =
              std::max(selected->latest_access_slot, slot);
          ++stats_.hits;
          out.resolved.emplace(key, *selected);
          continue;
        }
        if (kind.isTombstone()) {
          ++stats_.hits;
          out.resolved.emplace(key, *selected);
          continue;
        }
        // Unloaded, or compiled for an outdated environment: reload.
      }

      auto claim = loading_entries_.find(key);
      if (claim == loading_entries_.end()) {
        loading_entries_.emplace(key, LoadingClaim{slot, loader_token});
        ++stats_.misses;
        out.missing.insert(key);
      } else if (claim->second.token == loader_token) {
        out.missing.insert(key);
      } else {
        out.awaited.insert(key);
      }
    }
    return out;
  }

  InsertOutcome ProgramCache::finishLoad(const ProgramId &id, Slot slot,
                                         ProgramCacheEntry outcome,
                                         std::uint64_t loader_token) {
    (void)slot;
    InsertOutcome result;
    {
      std::lock_guard lock(mutex_);
      auto claim = loading_entries_.find(id);
      if (claim == loading_entries_.end()) {
        throw CacheError(CacheError::Code::NoSuchClaim,
                         "no loading claim for " + id.hex());
      }
      if (claim->second.token != loader_token) {
        throw CacheError(CacheError::Code::NotClaimHolder,
                         "loader " + std::to_string(loader_token)
                             + " does not hold the claim for " + id.hex());
      }
      outcome.program_id = id;
      if (outcome.kind.state != EntryState::Builtin
          && outcome.effective_slot < outcome.deployment_slot) {
        throw CacheError(CacheError::Code::InvariantViolation,
                         "effective slot precedes deployment slot");
      }
      loading_entries_.erase(claim);
      result = insertLocked(std::move(outcome));
      ++stats_.loads;
    }
    loading_task_waiter_.notify_all();
    return result;
  }

  void ProgramCache::waitForLoad(const ProgramId &id) {
    std::unique_lock lock(mutex_);
    loading_task_waiter_.wait(lock,
                              [&] { return !loading_entries_.contains(id); });
  }

  std::vector<EvictionRecord> ProgramCache::evictTwoRandom(Rng &rng) {
    std::lock_guard lock(mutex_);
    std::vector<EvictionRecord> evicted;
    if (loaded_count_ <= config_.capacity) {
      return evicted;
    }
    const std::uint64_t target = config_.evictionTarget();

    std::vector<ProgramCacheEntry *> candidates;
    candidates.reserve(loaded_count_);
    for (auto &[id, list] : entries_) {
      for (auto &e : list) {
        if (e.kind.state == EntryState::Loaded) {
          candidates.push_back(&e);
        }
      }
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const ProgramCacheEntry *a, const ProgramCacheEntry *b) {
                if (a->program_id != b->program_id) {
                  return a->program_id < b->program_id;
                }
                return a->deployment_slot < b->deployment_slot;
              });

    while (loaded_count_ > target && !candidates.empty()) {
      std::size_t victim_at;
      std::size_t other_at;
      if (candidates.size() == 1) {
        victim_at = other_at = 0;
      } else {
        std::size_t first = uniformIndex(rng, candidates.size());
        std::size_t second = uniformIndex(rng, candidates.size() - 1);
        if (second >= first) {
          ++second;
        }
        const auto *a = candidates[first];
        const auto *b = candidates[second];
        bool second_loses =
            b->tx_usage_counter < a->tx_usage_counter
            || (b->tx_usage_counter == a->tx_usage_counter
                && b->latest_access_slot < a->latest_access_slot);
        victim_at = second_loses ? second : first;
        other_at = second_loses ? first : second;
      }

      auto *victim = candidates[victim_at];
      const auto *other = candidates[other_at];
      evicted.push_back(EvictionRecord{
          victim->program_id, victim->deployment_slot, victim->tx_usage_counter,
          victim->latest_access_slot, other->program_id, other->deployment_slot,
          other->tx_usage_counter, other->latest_access_slot});

      victim->kind = EntryKind::unloaded();
      --loaded_count_;
      ++stats_.evictions;
      candidates.erase(candidates.begin()
                       + static_cast<std::ptrdiff_t>(victim_at));
    }
    return evicted;
  }

  PruneReport ProgramCache::prune(Slot new_root, const ledger::ForkGraph &graph,
                                  Epoch now_epoch, MicroTime cost_per_entry) {
    std::lock_guard lock(mutex_);
    PruneReport report;

    std::vector<ProgramId> ids;
    ids.reserve(entries_.size());
    for (const auto &[id, list] : entries_) {
      ids.push_back(id);
      report.entries_scanned += list.size();
    }
    std::sort(ids.begin(), ids.end());

    for (const auto &id : ids) {
      auto &list = entries_[id];
      std::vector<ProgramCacheEntry> kept;
      kept.reserve(list.size());

      // Drop versions deployed on branches that are no longer part of the
      // root's lineage.
      for (auto &e : list) {
        if (e.kind.state != EntryState::Builtin) {
          auto rel = graph.relationship(e.deployment_slot, new_root);
          if (rel == ledger::SlotRelationship::Unrelated
              || rel == ledger::SlotRelationship::Unknown) {
            report.removed.push_back(e);
            continue;
          }
        }
        kept.push_back(std::move(e));
      }

      // Among rooted versions only the newest remains reachable.
      std::ptrdiff_t newest_rooted = -1;
      for (std::size_t i = 0; i < kept.size(); ++i) {
        if (kept[i].deployment_slot <= new_root) {
          newest_rooted = static_cast<std::ptrdiff_t>(i);
        }
      }
      std::vector<ProgramCacheEntry> survivors;
      survivors.reserve(kept.size());
      for (std::size_t i = 0; i < kept.size(); ++i) {
        if (kept[i].deployment_slot <= new_root
            && static_cast<std::ptrdiff_t>(i) != newest_rooted) {
          report.removed.push_back(std::move(kept[i]));
        } else {
          survivors.push_back(std::move(kept[i]));
        }
      }

      for (auto &e : survivors) {
        if (e.kind.state == EntryState::Loaded
            && e.kind.env_version < runtime_env_) {
          e.kind = EntryKind::unloaded();
          report.recompile_queue.push_back(id);
        }
      }

      if (survivors.empty()) {
        entries_.erase(id);
      } else {
        list = std::move(survivors);
      }
    }

    loaded_count_ = 0;
    for (const auto &[id, list] : entries_) {
      for (const auto &e : list) {
        if (countsTowardCapacity(e.kind)) {
          ++loaded_count_;
        }
      }
    }

    latest_root_slot_ = new_root;
    latest_root_epoch_ = now_epoch;
    programs_to_recompile_ = report.recompile_queue;
    report.elapsed =
        cost_per_entry * static_cast<std::int64_t>(report.entries_scanned);
    ++stats_.prunes;
    stats_.prune_time += report.elapsed;
    return report;
  }

  void ProgramCache::onEpochBoundary(Epoch next_epoch) {
    std::lock_guard lock(mutex_);
    if (next_epoch != runtime_env_ + 1) {
      throw CacheError(CacheError::Code::NonAdjacentEpoch,
                       "epoch " + std::to_string(next_epoch)
                           + " does not follow " + std::to_string(runtime_env_));
    }
    runtime_env_ = next_epoch;
  }

  void ProgramCache::unloadEntry(const ProgramId &id, Slot deployment_slot) {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(id);
    if (it != entries_.end()) {
      for (auto &e : it->second) {
        if (e.deployment_slot != deployment_slot) {
          continue;
        }
        if (e.kind.state != EntryState::Loaded) {
          throw CacheError(CacheError::Code::NotLoaded,
                           id.hex() + " is " + std::string(toString(e.kind.state)));
        }
        e.kind = EntryKind::unloaded();
        --loaded_count_;
        return;
      }
    }
    throw CacheError(CacheError::Code::NoSuchEntry,
                     "no entry for " + id.hex() + " at slot "
                         + std::to_string(deployment_slot));
  }

  void ProgramCache::recordInstructionUsage(const ProgramId &id,
                                            Slot deployment_slot,
                                            std::uint64_t count) {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) {
      return;
    }
    for (auto &e : it->second) {
      if (e.deployment_slot == deployment_slot) {
        e.ix_usage_counter += count;
        return;
      }
    }
  }

  ProgramCacheStats ProgramCache::statsSnapshot() const {
    std::lock_guard lock(mutex_);
    return stats_;
  }

  std::size_t ProgramCache::loadedCount() const {
    std::lock_guard lock(mutex_);
    return loaded_count_;
  }

  std::size_t ProgramCache::entryCount() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto &[id, list] : entries_) {
      n += list.size();
    }
    return n;
  }

  std::uint64_t ProgramCache::currentEnvironment() const {
    std::lock_guard lock(mutex_);
    return runtime_env_;
  }

  Slot ProgramCache::latestRootSlot() const {
    std::lock_guard lock(mutex_);
    return latest_root_slot_;
  }

  Epoch ProgramCache::latestRootEpoch() const {
    std::lock_guard lock(mutex_);
    return latest_root_epoch_;
  }

  std::vector<ProgramCacheEntry> ProgramCache::versions(const ProgramId &id) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) {
      return {};
    }
    return it->second;
  }

  std::vector<ProgramId> ProgramCache::programIds() const {
    std::lock_guard lock(mutex_);
    std::vector<ProgramId> ids;
    ids.reserve(entries_.size());
    for (const auto &[id, list] : entries_) {
      ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  std::vector<ProgramId> ProgramCache::programsToRecompile() const {
    std::lock_guard lock(mutex_);
    return programs_to_recompile_;
  }

}  // namespace pcsim::cache
