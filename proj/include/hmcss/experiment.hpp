#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmcss/benchmarks.hpp"
#include "hmcss/samplers.hpp"
#include "hmcss/subsim.hpp"

namespace hmcss {

struct ExperimentConfig {
  std::string benchmark = "linear";
  BenchmarkParams params;
  KernelId kernel = KernelId::rs_g;
  SubsetConfig subset;
  SamplerConfig sampler;
  int repetitions = 200;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency

  // Throws ConfigError, including kernel/benchmark capability mismatches.
  void validate() const;
};

struct RepetitionRow {
  int rep = 0;
  double pf_hat = 0.0;
  double delta_f_hat = 0.0;
  std::uint64_t ng = 0;
  int levels = 0;
  bool converged = true;
  std::uint64_t counted_ng = 0;  // limit-state calls observed by a counting wrapper
};

struct AggregateReport {
  std::string benchmark;
  std::string kernel;
  double param = 0.0;  // value of the benchmark's primary parameter
  double mean_pf = 0.0;
  double empirical_cov = 0.0;
  double mean_delta_f = 0.0;
  double mean_ng = 0.0;
  double eff = 0.0;
  int reps = 0;
  std::uint64_t seed = 0;
  int not_converged = 0;
  std::vector<RepetitionRow> rows;
};

// Statistics over rows (sorted by rep). Sample standard deviation; 0 for one row.
AggregateReport aggregate(std::string benchmark, std::string kernel, double param,
                          std::uint64_t seed, std::vector<RepetitionRow> rows);

// Repetition r uses RandomStream(seed, 0).substream(r). Throws ConfigError
// before any sampling on invalid configuration.
AggregateReport run_experiment(const ExperimentConfig& config);

}  // namespace hmcss
