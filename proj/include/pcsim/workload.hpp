/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <variant>
#include <vector>

#include "pcsim/program_id.hpp"
#include "pcsim/rng.hpp"
#include "pcsim/txn.hpp"
#include "pcsim/types.hpp"

namespace pcsim::workload {

  class WorkloadError : public std::runtime_error {
   public:
    enum class Code { EmptyDomain, InvalidConfig, IoFailure, MalformedTrace };

    WorkloadError(Code code, const std::string &what, std::size_t line = 0)
        : std::runtime_error(what), code_(code), line_(line) {}

    Code code() const { return code_; }
    /// 1-based line of a MalformedTrace error, 0 otherwise.
    std::size_t line() const { return line_; }

   private:
    Code code_;
    std::size_t line_;
  };

  struct WorkloadConfig {
    std::uint64_t seed = 1;
    std::uint64_t num_programs = 1000;
    double zipf_s = 1.0;
    std::uint64_t num_accounts = 100'000;
    double txs_per_slot_mean = 128.0;
    double write_prob = 0.5;
    std::uint64_t accounts_per_tx_min = 2;
    std::uint64_t accounts_per_tx_max = 6;
    std::uint64_t cu_min = 1'000;
    std::uint64_t cu_max = 200'000;
    std::uint64_t data_bytes_max = 10'240;
    double vote_fraction = 0.0;
    std::uint64_t num_voters = 1'000;
    std::uint64_t slots = 1'000;
    double fork_prob_per_slot = 0.0;
    std::uint64_t root_lag = 32;
    double invalid_program_fraction = 0.0;

    void validate() const;
  };

  /// Exact Zipf(n, s) sampler over [0, n) using a cumulative table.
  class ZipfSampler {
   public:
    ZipfSampler(std::uint64_t n, double s);

    std::uint64_t operator()(Rng &rng) const;
    double probability(std::uint64_t k) const;
    std::uint64_t size() const { return cdf_.size(); }

   private:
    std::vector<double> cdf_;
  };

  /// One-shot form of ZipfSampler.
  std::uint64_t zipfSample(Rng &rng, std::uint64_t n, double s);

  struct ProgramRecord {
    ProgramId id;
    Slot deployment_slot = 0;
    Slot effective_slot = 0;
    std::uint64_t account_size = 0;
    bool valid = true;

    friend bool operator==(const ProgramRecord &, const ProgramRecord &) = default;
  };

  enum class Branch { Main, Fork };

  struct SlotRecord {
    Slot slot = 0;
    Slot parent = 0;
    Branch branch = Branch::Main;

    friend bool operator==(const SlotRecord &, const SlotRecord &) = default;
  };

  struct RootRecord {
    Slot slot = 0;

    friend bool operator==(const RootRecord &, const RootRecord &) = default;
  };

  struct TxRecord {
    Slot slot = 0;
    txn::Transaction tx;

    friend bool operator==(const TxRecord &, const TxRecord &) = default;
  };

  using TraceRecord = std::variant<ProgramRecord, SlotRecord, RootRecord, TxRecord>;
  using ForkEvent = std::variant<SlotRecord, RootRecord>;

  /// Synthetic program registry: num_programs user programs deployed at slot 0.
  std::vector<ProgramRecord> genPrograms(const WorkloadConfig &config, Rng &rng);

  std::vector<txn::Transaction> genSlotTxs(const WorkloadConfig &config,
                                           const std::vector<ProgramRecord> &programs,
                                           const ZipfSampler &popularity, Rng &rng,
                                           Slot slot);

  /**
   * Main chain grows by one slot per step. With probability
   * fork_prob_per_slot a competing sibling of the new main slot is emitted.
   * After each step the root moves to the main slot root_lag steps behind the
   * tip.
   */
  std::vector<ForkEvent> genForkSchedule(const WorkloadConfig &config, Rng &rng);

  /// Programs, then per slot its SlotRecord, TxRecords and any RootRecord.
  std::vector<TraceRecord> generate(const WorkloadConfig &config);

  void writeTrace(const std::vector<TraceRecord> &records, std::ostream &out);
  void writeTrace(const std::vector<TraceRecord> &records,
                  const std::filesystem::path &path);
  std::vector<TraceRecord> loadTrace(std::istream &in);
  std::vector<TraceRecord> loadTrace(const std::filesystem::path &path);

}  // namespace pcsim::workload
