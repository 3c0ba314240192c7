/**
 * Copyright (c) 2026 The pcsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <iostream>

#include <CLI11.hpp>

#include "pcsim/metrics.hpp"

int main(int argc, char **argv) {
  CLI::App app{"pcsim: fork-aware program cache simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string in_path;
  std::vector<std::uint64_t> sizes;
  std::optional<std::uint64_t> seed;

  auto *run = app.add_subcommand("run", "simulate one config and write CSVs");
  run->add_option("--config", config_path)->required();
  run->add_option("--out", out_path, "output directory")->required();
  run->add_option("--seed", seed);

  auto *sweep = app.add_subcommand("sweep", "run one simulation per cache size");
  sweep->add_option("--config", config_path)->required();
  sweep->add_option("--sizes", sizes)->required()->delimiter(',');
  sweep->add_option("--out", out_path, "output directory")->required();
  sweep->add_option("--seed", seed);

  auto *report = app.add_subcommand("report", "re-aggregate batches.csv");
  report->add_option("--in", in_path, "directory written by run")->required();

  auto *gen = app.add_subcommand("gen-trace", "write the generated workload trace");
  gen->add_option("--config", config_path)->required();
  gen->add_option("--out", out_path, "trace file")->required();
  gen->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e, std::cout, std::cerr);
    return code == 0 ? 0 : 1;
  }

  using namespace pcsim::metrics;
  if (*run) {
    return runSimulation(config_path, out_path, seed, std::cerr);
  }
  if (*sweep) {
    return runSweep(config_path, sizes, out_path, seed, std::cerr);
  }
  if (*report) {
    return runReport(in_path, std::cout, std::cerr);
  }
  return runGenTrace(config_path, out_path, seed, std::cerr);
}
