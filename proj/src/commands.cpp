/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>
#include <fstream>
#include <ostream>

#include "pcsim/metrics.hpp"

namespace pcsim::metrics {

  namespace fs = std::filesystem;

  namespace {

    SimConfig configWithSeed(const fs::path &path, std::optional<std::uint64_t> seed) {
      auto config = loadConfig(path);
      if (seed) {
        config.workload.seed = *seed;
        config.sim.seed = *seed;
      }
      return config;
    }

    RunOutput simulateRecords(const SimConfig &config,
                              const std::vector<workload::TraceRecord> &records,
                              const exec::Simulator::BatchObserver &observer) {
      exec::Simulator sim(config.sim);
      if (observer) {
        sim.setBatchObserver(observer);
      }
      sim.run(records);

      RunOutput out;
      for (const auto &b : sim.batches()) {
        out.series.recordBatch(b);
      }
      out.cache_stats = sim.cache().statsSnapshot();
      out.totals = sim.totals();
      return out;
    }

    template <typename Fn>
    void writeFile(const fs::path &path, Fn &&fn) {
      std::ofstream out(path, std::ios::binary);
      if (!out) {
        throw MetricsError(MetricsError::Code::BadInput,
                           "cannot open " + path.string() + " for writing");
      }
      fn(out);
      out.flush();
      if (!out) {
        throw MetricsError(MetricsError::Code::BadInput,
                           "write failed: " + path.string());
      }
    }

    template <typename Fn>
    int guarded(std::ostream &err, Fn &&fn) {
      try {
        fn();
        return 0;
      } catch (const std::exception &e) {
        err << "pcsim: " << e.what() << '\n';
        return 1;
      }
    }

  }  // namespace

  std::vector<workload::TraceRecord> workloadRecords(const SimConfig &config) {
    if (config.trace_path) {
      return workload::loadTrace(*config.trace_path);
    }
    return workload::generate(config.workload);
  }

  RunOutput simulate(const SimConfig &config,
                     const exec::Simulator::BatchObserver &observer) {
    return simulateRecords(config, workloadRecords(config), observer);
  }

  SweepReport sweep(const SimConfig &config, std::vector<std::uint64_t> sizes) {
    if (sizes.empty()) {
      throw MetricsError(MetricsError::Code::BadInput, "sweep needs at least one size");
    }
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

    const auto records = workloadRecords(config);
    SweepReport report;
    for (auto size : sizes) {
      SimConfig sized = config;
      sized.sim.cache.capacity = size;
      sized.sim.cache.validate();
      report.columns.push_back({size, simulateRecords(sized, records, {}).series});
    }
    return report;
  }

  int runSimulation(const fs::path &config_path, const fs::path &out_dir,
                    std::optional<std::uint64_t> seed_override, std::ostream &err) {
    return guarded(err, [&] {
      auto config = configWithSeed(config_path, seed_override);
      auto result = simulate(config);
      fs::create_directories(out_dir);
      writeFile(out_dir / "batches.csv",
                [&](std::ostream &o) { writeBatchesCsv(result.series, o); });
      writeFile(out_dir / "summary.csv",
                [&](std::ostream &o) { writeSummaryCsv(result.series, o); });
      writeFile(out_dir / "histograms.csv", [&](std::ostream &o) {
        writeHistogramsCsv(result.series, config.histograms, o);
      });
    });
  }

  int runSweep(const fs::path &config_path, const std::vector<std::uint64_t> &sizes,
               const fs::path &out_dir, std::optional<std::uint64_t> seed_override,
               std::ostream &err) {
    return guarded(err, [&] {
      auto config = configWithSeed(config_path, seed_override);
      auto report = sweep(config, sizes);
      fs::create_directories(out_dir);
      writeFile(out_dir / "sweep.csv",
                [&](std::ostream &o) { writeSweepCsv(report, o); });
    });
  }

  int runReport(const fs::path &in_dir, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
      std::ifstream in(in_dir / "batches.csv", std::ios::binary);
      if (!in) {
        throw MetricsError(MetricsError::Code::BadInput,
                           "cannot open " + (in_dir / "batches.csv").string());
      }
      writeSummaryCsv(readBatchesCsv(in), out);
    });
  }

  int runGenTrace(const fs::path &config_path, const fs::path &out_path,
                  std::optional<std::uint64_t> seed_override, std::ostream &err) {
    return guarded(err, [&] {
      auto config = configWithSeed(config_path, seed_override);
      workload::writeTrace(workload::generate(config.workload), out_path);
    });
  }

}  // namespace pcsim::metrics
