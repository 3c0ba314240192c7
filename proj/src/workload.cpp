/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pcsim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcsim/builtins.hpp"

namespace pcsim::workload {

  namespace {
    void require(bool ok, const std::string &what) {
      if (!ok) {
        throw WorkloadError(WorkloadError::Code::InvalidConfig, what);
      }
    }

    bool isProbability(double p) { return p >= 0.0 && p <= 1.0; }

    constexpr txn::AccountId kVoteAccountBase = 1ULL << 48;
  }  // namespace

  void WorkloadConfig::validate() const {
    require(num_programs >= 1, "num_programs must be >= 1");
    require(zipf_s >= 0.0 && std::isfinite(zipf_s), "zipf_s must be >= 0");
    require(num_accounts >= 1, "num_accounts must be >= 1");
    require(txs_per_slot_mean >= 0.0 && std::isfinite(txs_per_slot_mean),
            "txs_per_slot_mean must be >= 0");
    require(isProbability(write_prob), "write_prob must be in [0, 1]");
    require(accounts_per_tx_min <= accounts_per_tx_max,
            "accounts_per_tx_min exceeds accounts_per_tx_max");
    require(accounts_per_tx_max <= num_accounts,
            "accounts_per_tx_max exceeds num_accounts");
    require(cu_min <= cu_max, "cu_min exceeds cu_max");
    require(isProbability(vote_fraction), "vote_fraction must be in [0, 1]");
    require(num_voters >= 1, "num_voters must be >= 1");
    require(isProbability(fork_prob_per_slot),
            "fork_prob_per_slot must be in [0, 1]");
    require(isProbability(invalid_program_fraction),
            "invalid_program_fraction must be in [0, 1]");
  }

  ZipfSampler::ZipfSampler(std::uint64_t n, double s) {
    if (n == 0) {
      throw WorkloadError(WorkloadError::Code::EmptyDomain,
                          "zipf domain must be non-empty");
    }
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw WorkloadError(WorkloadError::Code::InvalidConfig,
                          "zipf exponent must be >= 0");
    }
    cdf_.resize(n);
    double total = 0.0;
    for (std::uint64_t k = 0; k < n; ++k) {
      total += std::pow(static_cast<double>(k + 1), -s);
      cdf_[k] = total;
    }
    for (auto &c : cdf_) {
      c /= total;
    }
    cdf_.back() = 1.0;
  }

  std::uint64_t ZipfSampler::operator()(Rng &rng) const {
    double u = uniformUnit(rng);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::uint64_t>(
        std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                 static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
  }

  double ZipfSampler::probability(std::uint64_t k) const {
    if (k >= cdf_.size()) {
      return 0.0;
    }
    return k == 0 ? cdf_[0] : cdf_[k] - cdf_[k - 1];
  }

  std::uint64_t zipfSample(Rng &rng, std::uint64_t n, double s) {
    return ZipfSampler(n, s)(rng);
  }

  std::vector<ProgramRecord> genPrograms(const WorkloadConfig &config, Rng &rng) {
    std::vector<ProgramRecord> out;
    out.reserve(config.num_programs);
    for (std::uint64_t i = 0; i < config.num_programs; ++i) {
      ProgramRecord p;
      p.id = ProgramId::fromIndex(i);
      p.account_size = 16'384 + uniformIndex(rng, 1'000'000);
      p.valid = uniformUnit(rng) >= config.invalid_program_fraction;
      out.push_back(p);
    }
    return out;
  }

  std::vector<txn::Transaction> genSlotTxs(const WorkloadConfig &config,
                                           const std::vector<ProgramRecord> &programs,
                                           const ZipfSampler &popularity, Rng &rng,
                                           Slot slot) {
    const std::uint64_t count = poisson(rng, config.txs_per_slot_mean);
    if (count >= (1ULL << 24)) {
      throw WorkloadError(WorkloadError::Code::InvalidConfig,
                          "too many transactions in one slot");
    }
    std::vector<txn::Transaction> txs;
    txs.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      txn::Transaction tx;
      tx.sig = (slot << 24) | i;
      tx.blockhash_ref = slot;

      if (uniformUnit(rng) < config.vote_fraction) {
        tx.is_vote = true;
        tx.programs = {builtins::vote()};
        tx.writes = {kVoteAccountBase + uniformIndex(rng, config.num_voters)};
        tx.requested_cu = 2'100;
        txs.push_back(std::move(tx));
        continue;
      }

      tx.programs = {programs[popularity(rng)].id};
      const auto span = config.accounts_per_tx_max - config.accounts_per_tx_min + 1;
      const auto n_accounts = config.accounts_per_tx_min + uniformIndex(rng, span);
      std::vector<txn::AccountId> picked;
      picked.reserve(n_accounts);
      while (picked.size() < n_accounts) {
        auto a = uniformIndex(rng, config.num_accounts);
        if (std::find(picked.begin(), picked.end(), a) == picked.end()) {
          picked.push_back(a);
        }
      }
      for (auto a : picked) {
        (uniformUnit(rng) < config.write_prob ? tx.writes : tx.reads).push_back(a);
      }
      std::sort(tx.reads.begin(), tx.reads.end());
      std::sort(tx.writes.begin(), tx.writes.end());
      tx.requested_cu = config.cu_min + uniformIndex(rng, config.cu_max - config.cu_min + 1);
      tx.data_bytes = uniformIndex(rng, config.data_bytes_max + 1);
      txs.push_back(std::move(tx));
    }
    return txs;
  }

  std::vector<ForkEvent> genForkSchedule(const WorkloadConfig &config, Rng &rng) {
    std::vector<ForkEvent> events;
    std::vector<Slot> main_chain{0};
    Slot next = 1;
    Slot root = 0;
    for (std::uint64_t step = 0; step < config.slots; ++step) {
      const Slot tip = main_chain.back();
      const Slot main = next++;
      events.emplace_back(SlotRecord{main, tip, Branch::Main});
      if (uniformUnit(rng) < config.fork_prob_per_slot) {
        events.emplace_back(SlotRecord{next++, tip, Branch::Fork});
      }
      main_chain.push_back(main);
      const std::size_t tip_index = main_chain.size() - 1;
      if (tip_index > config.root_lag) {
        const Slot target = main_chain[tip_index - config.root_lag];
        if (target > root) {
          root = target;
          events.emplace_back(RootRecord{root});
        }
      }
    }
    return events;
  }

  std::vector<TraceRecord> generate(const WorkloadConfig &config) {
    config.validate();
    Rng program_rng = makeRng(config.seed, 1);
    Rng fork_rng = makeRng(config.seed, 2);
    Rng tx_rng = makeRng(config.seed, 3);

    const auto programs = genPrograms(config, program_rng);
    const ZipfSampler popularity(config.num_programs, config.zipf_s);

    std::vector<TraceRecord> records;
    records.reserve(programs.size()
                    + config.slots
                          * static_cast<std::size_t>(2 + config.txs_per_slot_mean));
    for (const auto &p : programs) {
      records.emplace_back(p);
    }
    for (const auto &event : genForkSchedule(config, fork_rng)) {
      if (const auto *s = std::get_if<SlotRecord>(&event)) {
        records.emplace_back(*s);
        for (auto &tx : genSlotTxs(config, programs, popularity, tx_rng, s->slot)) {
          records.emplace_back(TxRecord{s->slot, std::move(tx)});
        }
      } else {
        records.emplace_back(std::get<RootRecord>(event));
      }
    }
    return records;
  }

}  // namespace pcsim::workload
