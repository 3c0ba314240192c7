/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcsim/exec.hpp"

namespace pcsim::metrics {

  class MetricsError : public std::runtime_error {
   public:
    enum class Code { EmptySeries, BadBins, BadInput };

    MetricsError(Code code, const std::string &what)
        : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

   private:
    Code code_;
  };

  /// Per-batch values stored as integers over a fixed scale (1 for counts,
  /// 1e6 for microsecond timings) so aggregates are exact.
  struct MetricSeries {
    std::string name;
    std::int64_t scale = 1;
    std::vector<std::int64_t> values;

    double valueAt(std::size_t i) const {
      return static_cast<double>(values[i]) / static_cast<double>(scale);
    }
    /// Six-decimal text for time series, bare integer otherwise.
    std::string render(std::int64_t raw) const;
  };

  struct SummaryRow {
    std::string metric;
    std::int64_t scale = 1;
    std::int64_t min_raw = 0;
    std::int64_t max_raw = 0;
    std::int64_t sum_raw = 0;
    std::uint64_t count = 0;

    double min() const { return static_cast<double>(min_raw) / scale; }
    double max() const { return static_cast<double>(max_raw) / scale; }
    double sum() const { return static_cast<double>(sum_raw) / scale; }
    double mean() const {
      return static_cast<double>(sum_raw) / static_cast<double>(scale)
           / static_cast<double>(count);
    }
    /// mean rounded to six decimals, exact.
    std::string meanText() const;
  };

  /// Fixed set of series, one per BatchStats column.
  class SeriesStore {
   public:
    SeriesStore();

    void recordBatch(const exec::BatchStats &stats);

    const std::vector<MetricSeries> &series() const { return series_; }
    const MetricSeries &get(std::string_view name) const;
    std::size_t size() const { return slots_.size(); }

    const std::vector<Slot> &slots() const { return slots_; }
    const std::vector<std::uint64_t> &batchIndices() const { return batch_index_; }

   private:
    std::vector<Slot> slots_;
    std::vector<std::uint64_t> batch_index_;
    std::vector<MetricSeries> series_;
  };

  SummaryRow summarize(const MetricSeries &series);

  struct HistogramBin {
    double start = 0.0;
    std::uint64_t count = 0;
    bool overflow = false;
  };

  /// Half-open bins [start, start + width) from 0 up to max_value; values at
  /// or above max_value pool into one overflow bin starting at max_value.
  std::vector<HistogramBin> histogram(const MetricSeries &series, double bin_width,
                                      double max_value);

  struct HistogramSpec {
    std::string metric;
    double bin_width = 1.0;
    double max_value = 64.0;
  };

  std::vector<HistogramSpec> defaultHistogramSpecs();

  /// Parsed configuration file.
  struct SimConfig {
    workload::WorkloadConfig workload;
    exec::SimulatorConfig sim;
    std::optional<std::filesystem::path> trace_path;
    std::vector<HistogramSpec> histograms = defaultHistogramSpecs();

    void validate() const;
  };

  /**
   * Flat sectioned key = value text:
   *
   *   [workload]
   *   seed = 7
   *   zipf_s = 1.1
   *
   * Recognized sections: workload, cache, budget, latency, sim, report.
   * '#' starts a comment. Unknown keys are errors.
   */
  SimConfig parseConfig(std::istream &in, const std::string &origin = "<config>");
  SimConfig loadConfig(const std::filesystem::path &path);

  /// The records a config describes: its trace file, or generated ones.
  std::vector<workload::TraceRecord> workloadRecords(const SimConfig &config);

  struct RunOutput {
    SeriesStore series;
    cache::ProgramCacheStats cache_stats;
    exec::RunTotals totals;
  };

  /// Executes the whole pipeline in memory.
  RunOutput simulate(const SimConfig &config,
                     const exec::Simulator::BatchObserver &observer = {});

  void writeBatchesCsv(const SeriesStore &store, std::ostream &out);
  void writeSummaryCsv(const SeriesStore &store, std::ostream &out);
  void writeHistogramsCsv(const SeriesStore &store,
                          const std::vector<HistogramSpec> &specs, std::ostream &out);

  /// Reads a batches.csv back into a SeriesStore.
  SeriesStore readBatchesCsv(std::istream &in);

  struct SweepColumn {
    std::uint64_t capacity = 0;
    SeriesStore series;
  };

  /// Columns ordered by capacity, largest first.
  struct SweepReport {
    std::vector<SweepColumn> columns;

    double meanOf(std::uint64_t capacity, std::string_view metric) const;
  };

  SweepReport sweep(const SimConfig &config, std::vector<std::uint64_t> sizes);
  void writeSweepCsv(const SweepReport &report, std::ostream &out);

  // Command entry points. Each returns a process exit code and writes
  // diagnostics to err.
  int runSimulation(const std::filesystem::path &config_path,
                    const std::filesystem::path &out_dir,
                    std::optional<std::uint64_t> seed_override, std::ostream &err);
  int runSweep(const std::filesystem::path &config_path,
               const std::vector<std::uint64_t> &sizes,
               const std::filesystem::path &out_dir,
               std::optional<std::uint64_t> seed_override, std::ostream &err);
  int runReport(const std::filesystem::path &in_dir, std::ostream &out,
                std::ostream &err);
  int runGenTrace(const std::filesystem::path &config_path,
                  const std::filesystem::path &out_path,
                  std::optional<std::uint64_t> seed_override, std::ostream &err);

}  // namespace pcsim::metrics
