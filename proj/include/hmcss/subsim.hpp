#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hmcss/dynamics.hpp"
#include "hmcss/limit_state.hpp"
#include "hmcss/prob_core.hpp"
#include "hmcss/random_stream.hpp"
#include "hmcss/samplers.hpp"

namespace hmcss {

enum class KernelId { rs_g, bb_g, rs_l, bb_l, cwmh, block_mh };

std::string_view to_string(KernelId k);
// Throws ConfigError for unknown names.
KernelId kernel_from_string(std::string_view name);

/// A reliability problem: the distribution of the random vector and the
/// limit state on it.
struct Problem {
  std::string label;
  LimitState g;
  TargetDensity target;
  MassMatrix mass;
  // target is the standard normal: the exact-flow kernels apply.
  bool standard_normal = false;
  // i.i.d. draw from the target; may be empty when only MCMC is possible.
  std::function<Vector(RandomStream&)> sample;
  // Start of an MCMC-generated initial population.
  std::optional<Vector> chain_start;

  std::size_t dim() const { return target.dim(); }
};

enum class InitialSampling { iid, mcmc };

struct SubsetConfig {
  int n = 1000;
  double p0 = 0.1;
  int max_levels = 20;
  int thinning_lag = 0;  // 0 = consecutive chain samples
  InitialSampling initial = InitialSampling::iid;

  // Throws ConfigError.
  void validate() const;
  int seeds() const;         // N p0
  int chain_length() const;  // 1 / p0
};

struct SubsetLevelRecord {
  int level = 0;
  double threshold = 0.0;
  double p_j = 0.0;
  double acceptance_rate = 0.0;  // of the chains that produced this level's samples
  double t_f_used = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  std::uint64_t g_evals = 0;  // spent producing this level's samples (level 0: N)
  bool degenerate = false;    // P_j in {0, 1}
};

struct RunReport {
  double pf_hat = 0.0;
  double delta_f_hat = 0.0;
  std::uint64_t ng = 0;
  std::vector<SubsetLevelRecord> levels;
  double eff = 0.0;
  bool converged = true;
  std::uint64_t final_failures = 0;  // samples with G <= 0 at the last level
  std::uint64_t diverged_steps = 0;
};

struct ThresholdSelection {
  double threshold = 0.0;
  std::vector<std::size_t> seeds;  // ascending sample index
  bool final_level = false;
  std::size_t below = 0;  // samples with G <= threshold
};

// Throws EstimationError when fewer than N p0 values are non-NaN.
ThresholdSelection select_threshold(const std::vector<double>& g_values, double p0);

// gamma from indicator chains of equal length (rows = chains).
double correlation_factor(const std::vector<std::vector<bool>>& chains);
// sqrt((1 - P) / (N P) (1 + gamma)); 0 when P is 0 or 1.
double level_cov(double p_j, int n, double gamma);
// Root of the sum of squared level c.o.v.s.
double combine_cov(const std::vector<SubsetLevelRecord>& levels);

// Every k-th sample (k = 0 treated as 1) until n are collected.
// Throws std::invalid_argument naming the required length.
std::vector<Vector> thin_initial_chain(const std::vector<Vector>& chain, int k, int n);

double eff_metric(double cov, double ng);

// Throws ConfigError when the kernel needs a capability the problem lacks.
void check_kernel_capability(const Problem& problem, KernelId kernel, const SamplerConfig& kcfg);

// One kernel step, dispatched on the kernel id.
StepOutcome kernel_step(KernelId kernel, const Problem& problem, ChainState chain,
                        double threshold, const SamplerConfig& kcfg);

RunReport run_subset_simulation(const Problem& problem, KernelId kernel, const SubsetConfig& scfg,
                                const SamplerConfig& kcfg, RandomStream stream);

// Unconstrained leapfrog HMC chain of `length` states starting at `start`
// (the start is the first state).
std::vector<Vector> hmc_chain(const HamiltonianSystem& sys, const Vector& start, int length,
                              double t_f, double dt, RandomStream& stream);

struct CrudeMonteCarlo {
  double pf = 0.0;
  double std_error = 0.0;
  std::uint64_t failures = 0;
  std::uint64_t samples = 0;
};

CrudeMonteCarlo crude_monte_carlo(const Problem& problem, std::uint64_t samples,
                                  RandomStream stream);

}  // namespace hmcss
