/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pcsim/exec.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "pcsim/builtins.hpp"

namespace pcsim::exec {

  LatencyModel fitLatencyModel(double mean_misses_a, double mean_pc_us_a,
                               double mean_misses_b, double mean_pc_us_b) {
    const double dm = mean_misses_a - mean_misses_b;
    if (dm == 0.0 || !std::isfinite(dm)) {
      throw ExecError(ExecError::Code::DegenerateFit,
                      "latency fit needs two distinct miss means");
    }
    const double per_miss = (mean_pc_us_a - mean_pc_us_b) / dm;
    const double base = mean_pc_us_a - mean_misses_a * per_miss;
    LatencyModel m;
    m.per_miss_load = MicroTime::fromMicros(per_miss);
    m.per_batch_base = MicroTime::fromMicros(base);
    m.per_hit = MicroTime{};
    return m;
  }

  std::size_t BatchResult::count(OutcomeKind k) const {
    return static_cast<std::size_t>(
        std::count_if(outcomes.begin(), outcomes.end(),
                      [k](const TxOutcome &o) { return o.kind == k; }));
  }

  ProgramLoader::ProgramLoader(const std::vector<workload::ProgramRecord> &programs) {
    for (const auto &p : programs) {
      add(p);
    }
  }

  void ProgramLoader::add(const workload::ProgramRecord &program) {
    programs_[program.id] = program;
  }

  cache::ProgramCacheEntry ProgramLoader::load(const ProgramId &id, Slot slot,
                                               std::uint64_t env_version) const {
    ++loads_;
    cache::ProgramCacheEntry e;
    e.program_id = id;
    e.account_owner = builtins::loaderOwner();
    e.tx_usage_counter = 1;
    e.latest_access_slot = slot;
    auto it = programs_.find(id);
    if (it == programs_.end()) {
      e.kind = cache::EntryKind::closed();
      return e;
    }
    const auto &p = it->second;
    e.kind = p.valid ? cache::EntryKind::loaded(env_version)
                     : cache::EntryKind::failedVerification();
    e.account_size = p.account_size;
    e.deployment_slot = p.deployment_slot;
    e.effective_slot = p.effective_slot;
    return e;
  }

  void seedBuiltins(cache::ProgramCache &cache) {
    for (auto name : builtins::kNames) {
      cache::ProgramCacheEntry e;
      e.program_id = ProgramId::fromName(name);
      e.kind = cache::EntryKind::builtin();
      e.account_owner = ProgramId::fromName("native_loader");
      cache.insertEntry(e);
    }
  }

  Replenished replenishProgramCache(const std::vector<txn::SanitizedTransaction> &batch,
                                    cache::ProgramCache &cache,
                                    const ledger::ForkGraph &graph, Slot slot,
                                    std::uint64_t lane_token,
                                    const ProgramLoader &loader, Rng &eviction_rng) {
    std::set<ProgramId> keys;
    for (const auto &tx : batch) {
      keys.insert(tx.tx().programs.begin(), tx.tx().programs.end());
    }

    Replenished out;
    out.programs = cache.extractForBatch(keys, slot, graph, lane_token);
    out.hits = out.programs.resolved.size();
    out.misses = out.programs.missing.size();

    auto load_missing = [&](cache::BatchCache &bc) {
      for (const auto &id : bc.missing) {
        auto entry = loader.load(id, slot, cache.currentEnvironment());
        cache.finishLoad(id, slot, entry, lane_token);
        out.programs.resolved.insert_or_assign(id, entry);
      }
      bc.missing.clear();
    };
    load_missing(out.programs);

    // Programs another lane is loading: wait for it, then look again.
    std::set<ProgramId> awaited = std::move(out.programs.awaited);
    out.programs.awaited.clear();
    while (!awaited.empty()) {
      for (const auto &id : awaited) {
        cache.waitForLoad(id);
      }
      auto again = cache.extractForBatch(awaited, slot, graph, lane_token);
      out.hits += again.resolved.size();
      out.misses += again.missing.size();
      for (auto &[id, entry] : again.resolved) {
        out.programs.resolved.insert_or_assign(id, entry);
      }
      load_missing(again);
      awaited = std::move(again.awaited);
    }

    if (cache.loadedCount() > cache.config().capacity) {
      out.eviction_log = cache.evictTwoRandom(eviction_rng);
      out.evictions = out.eviction_log.size();
    }
    return out;
  }

  std::pair<BatchResult, BatchStats> executeBatch(
      const std::vector<txn::SanitizedTransaction> &batch, const Replenished &programs,
      cache::ProgramCache &cache, const LatencyModel &model,
      double actual_cu_fraction) {
    BatchResult result;
    BatchStats stats;
    std::map<std::pair<ProgramId, Slot>, std::uint64_t> invocations;

    for (const auto &stx : batch) {
      const auto &tx = stx.tx();
      bool runnable = true;
      for (const auto &id : tx.programs) {
        auto it = programs.programs.resolved.find(id);
        if (it == programs.programs.resolved.end()) {
          throw ExecError(ExecError::Code::UnresolvedProgram,
                          "program " + id.hex() + " not resolved for batch");
        }
        if (!it->second.kind.isExecutable()) {
          runnable = false;
        } else {
          ++invocations[{id, it->second.deployment_slot}];
        }
      }

      TxOutcome o;
      o.sig = tx.sig;
      o.blockhash_ref = tx.blockhash_ref;
      if (runnable) {
        o.kind = OutcomeKind::Committed;
        o.actual_cu = static_cast<std::uint64_t>(
            std::floor(static_cast<double>(tx.requested_cu) * actual_cu_fraction));
        o.actual_cu = std::min(o.actual_cu, tx.requested_cu);
        stats.cu_consumed += o.actual_cu;
        ++stats.executed_count;
      } else {
        o.kind = OutcomeKind::Dropped;
        o.error = txn::TxError::InvalidProgramForExecution;
      }
      result.outcomes.push_back(o);
    }

    for (const auto &[key, n] : invocations) {
      cache.recordInstructionUsage(key.first, key.second, n);
    }

    stats.hits = programs.hits;
    stats.misses = programs.misses;
    stats.evictions = programs.evictions;
    stats.pc_time = model.pcTime(programs.hits, programs.misses);
    return {std::move(result), stats};
  }

  void commitBatch(const std::vector<txn::SanitizedTransaction> &batch,
                   const BatchResult &result, txn::StatusCache &status_cache,
                   txn::BlockBudget &budget, txn::AccountLockTable &locks) {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto &stx = batch[i];
      const auto &o = result.outcomes.at(i);
      if (o.kind == OutcomeKind::Committed) {
        status_cache.insert(stx.tx().sig, stx.tx().blockhash_ref);
        budget.adjust(stx, o.actual_cu);
      } else {
        budget.adjust(stx, 0);
      }
      locks.unlock(stx);
    }
  }

  SlotReport runSlot(Slot slot, std::deque<txn::SanitizedTransaction> &queue,
                     ExecContext &ctx) {
    const auto &settings = ctx.settings;
    SlotReport report;
    report.lane_time.resize(std::max<std::size_t>(settings.lanes, 1));

    std::erase_if(queue, [&](const txn::SanitizedTransaction &tx) {
      bool expired =
          txn::blockhashExpired(tx.tx(), slot, settings.max_blockhash_age);
      report.expired += expired ? 1 : 0;
      return expired;
    });

    txn::BlockBudget budget(settings.limits);
    txn::AccountLockTable locks;

    for (std::uint64_t batch_index = 0;
         batch_index < settings.max_batches_per_slot && !queue.empty();
         ++batch_index) {
      auto formed = txn::formBatch(queue, locks, budget, ctx.status_cache,
                                   settings.max_batch_size);
      if (formed.batch.empty()) {
        for (const auto &[tx, err] : formed.deferred) {
          report.dropped += txn::isRetryable(err) ? 0 : 1;
        }
        break;
      }
      const std::size_t lane = batch_index % report.lane_time.size();

      auto programs = replenishProgramCache(formed.batch, ctx.cache, ctx.graph,
                                            slot, lane, ctx.loader,
                                            ctx.eviction_rng);
      auto [result, stats] = executeBatch(formed.batch, programs, ctx.cache,
                                          ctx.model, settings.actual_cu_fraction);
      commitBatch(formed.batch, result, ctx.status_cache, budget, locks);

      for (const auto &[tx, err] : formed.deferred) {
        TxOutcome o;
        o.sig = tx.tx().sig;
        o.blockhash_ref = tx.tx().blockhash_ref;
        o.kind = txn::isRetryable(err) ? OutcomeKind::Deferred : OutcomeKind::Dropped;
        o.error = err;
        result.outcomes.push_back(o);
      }

      stats.slot = slot;
      stats.batch_index = batch_index;
      stats.deferred_count = formed.deferred.size();
      if (ctx.pending_prune != nullptr) {
        stats.prune_time = *ctx.pending_prune;
        *ctx.pending_prune = MicroTime{};
      }
      report.dropped += result.count(OutcomeKind::Dropped);
      report.lane_time[lane] += stats.pc_time;
      report.cu_committed += stats.cu_consumed;
      if (ctx.on_batch) {
        ctx.on_batch(formed.batch, result, stats);
      }
      report.batches.push_back(stats);
    }
    return report;
  }

  Simulator::Simulator(SimulatorConfig config)
      : config_(std::move(config)),
        graph_(0),
        cache_(config_.cache),
        eviction_rng_(makeRng(config_.seed, 4)) {
    seedBuiltins(cache_);
  }

  void Simulator::run(const std::vector<workload::TraceRecord> &records) {
    for (const auto &r : records) {
      consume(r);
    }
    flush();
  }

  void Simulator::flush() { executePending(); }

  void Simulator::consume(const workload::TraceRecord &record) {
    if (const auto *p = std::get_if<workload::ProgramRecord>(&record)) {
      loader_.add(*p);
    } else if (const auto *s = std::get_if<workload::SlotRecord>(&record)) {
      executePending();
      graph_.addSlot(s->slot, s->parent);
      pending_ = PendingSlot{*s, {}};
    } else if (const auto *t = std::get_if<workload::TxRecord>(&record)) {
      if (!pending_ || pending_->record.slot != t->slot) {
        throw std::invalid_argument("transaction for slot " + std::to_string(t->slot)
                                    + " arrived outside its slot");
      }
      pending_->arrivals.push_back(t->tx);
    } else {
      executePending();
      const Slot root = std::get<workload::RootRecord>(record).slot;
      graph_.setRoot(root);
      auto pruned = cache_.prune(
          root, graph_, ledger::epochOf(root, config_.cache.slots_per_epoch),
          config_.latency.prune_per_entry);
      pending_prune_ += pruned.elapsed;
    }
  }

  void Simulator::executePending() {
    if (!pending_) {
      return;
    }
    PendingSlot pending = std::move(*pending_);
    pending_.reset();
    const Slot slot = pending.record.slot;
    if (frozen_.contains(slot)) {
      throw ExecError(ExecError::Code::SlotFrozen,
                      "slot " + std::to_string(slot) + " is already frozen");
    }

    const Epoch epoch = ledger::epochOf(slot, config_.cache.slots_per_epoch);
    while (cache_.currentEnvironment() < epoch) {
      cache_.onEpochBoundary(cache_.currentEnvironment() + 1);
    }

    std::deque<txn::SanitizedTransaction> fork_queue;
    auto &queue =
        pending.record.branch == workload::Branch::Main ? main_queue_ : fork_queue;
    totals_.arrivals += pending.arrivals.size();
    for (auto &tx : pending.arrivals) {
      auto sanitized =
          txn::sanitize(std::move(tx), slot, config_.slot.enabled_precompiles,
                        config_.slot.max_blockhash_age, config_.slot.limits);
      if (auto *ok = std::get_if<txn::SanitizedTransaction>(&sanitized)) {
        queue.push_back(std::move(*ok));
      } else {
        ++totals_.rejected;
      }
    }

    ExecContext ctx{cache_,       graph_,         status_cache_, loader_,
                    config_.latency, config_.slot, eviction_rng_, {},
                    &pending_prune_};
    if (observer_) {
      ctx.on_batch = [&](const std::vector<txn::SanitizedTransaction> &batch,
                         const BatchResult &result, const BatchStats &stats) {
        observer_(slot, batch, result, stats);
      };
    }
    auto report = runSlot(slot, queue, ctx);

    for (const auto &b : report.batches) {
      batches_.push_back(b);
      totals_.committed += b.executed_count;
    }
    totals_.batches += report.batches.size();
    totals_.expired += report.expired;
    totals_.dropped += report.dropped;
    totals_.discarded += fork_queue.size();
    ++totals_.slots;
    frozen_.insert(slot);
  }

  const RunTotals &Simulator::totals() const {
    totals_.queued_at_end = main_queue_.size();
    return totals_;
  }

}  // namespace pcsim::exec
