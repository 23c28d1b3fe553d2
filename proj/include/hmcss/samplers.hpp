#pragma once

#include <functional>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include "hmcss/dynamics.hpp"
#include "hmcss/limit_state.hpp"
#include "hmcss/prob_core.hpp"
#include "hmcss/random_stream.hpp"

namespace hmcss {

enum class HitSolver { secant, newton, analytic };

std::string_view to_string(HitSolver s);
// Throws ConfigError for unknown names.
HitSolver hit_solver_from_string(std::string_view name);

/// Tuning parameters shared by the HMC and MH kernels.
struct SamplerConfig {
  double t_f = std::numbers::pi / 4.0;  // trajectory duration
  double alpha = 0.0;                   // partial momentum refreshment
  double dt = 0.05;                     // leapfrog step
  double a_low = 0.3;
  double a_up = 0.5;
  double a_star = 0.8;  // BB acceptance target
  int n_a = 10;         // chains per adaptation batch
  double toll = 1e-6;   // hitting-time residual, G units
  int max_iter = 50;    // root-finder iteration cap
  double mh_width = 2.0;
  HitSolver hit_solver = HitSolver::secant;
  int period_step_cap = 10000;  // U-turn search cap per state
  bool adapt = true;

  // Throws ConfigError. `gaussian_path` additionally forbids t_f = 2 pi.
  void validate(bool gaussian_path) const;
};

struct ChainState {
  Vector position;
  double g_value = 0.0;  // G(position), kept coherent by every kernel
  Vector last_momentum;  // p* for partial refreshment; empty before the first step
  RandomStream stream;
};

struct StepOutcome {
  ChainState state;
  bool accepted = false;
  int g_evals = 0;
  bool bounced = false;
  bool diverged = false;
};

// p' = alpha p* + sqrt(1 - alpha^2) p_rand. An empty p_star means full refresh.
Vector combine_momentum(double alpha, const Vector& p_star, const Vector& p_rand);
Vector draw_momentum(RandomStream& stream, const MassMatrix& mass, double alpha,
                     const Vector& p_star);

/// Result of a hitting-time search along a trajectory parameterized by t.
struct HitTime {
  double t_h = 0.0;
  double t_prev = 0.0;  // previous iterate (secant direction surrogate)
  int iterations = 0;
  int g_evals = 0;
  bool converged = false;
  std::optional<Vector> gradient;  // grad G at t_h, when the solver evaluated it
};

// g_of_t returns G(u(t)) - threshold; each call is one limit-state evaluation.
HitTime secant_hit_time(const std::function<double(double)>& g_of_t, double t0, double t1,
                        double g0, double g1, const SamplerConfig& cfg);

struct NewtonPoint {
  double g = 0.0;     // G(u(t)) - threshold
  double dgdt = 0.0;  // grad G . M^-1 p(t)
  Vector gradient;    // grad G(u(t))
};

// `eval` is one limit-state evaluation (value and gradient) per call.
HitTime newton_hit_time(const std::function<NewtonPoint(double)>& eval, double t0, double t1,
                        double g0, double g1, const SamplerConfig& cfg);

// First exit time in (0, t_f] of the linear limit state beta0 - sum(u)/sqrt(n)
// along the standard-normal flow from (u, p); nullopt if the trajectory never
// reaches the surface. A root at t = 0 is skipped.
std::optional<double> analytic_hit_time_linear(double beta0, const Vector& u, const Vector& p,
                                               double t_f);

/// Rejection-sampling HMC on phi(u | G <= threshold), exact flow.
StepOutcome rs_hmc_step_gaussian(ChainState chain, const LimitState& g, double threshold,
                                 const SamplerConfig& cfg);

/// Barrier-bouncing HMC on phi(u | G <= threshold), exact flow, at most one bounce.
StepOutcome bb_hmc_step_gaussian(ChainState chain, const LimitState& g, double threshold,
                                 const SamplerConfig& cfg, HitSolver solver);

/// Rejection-sampling HMC with leapfrog and Metropolis correction.
StepOutcome rs_hmc_step_generic(ChainState chain, const HamiltonianSystem& sys,
                                const LimitState& g, double threshold, const SamplerConfig& cfg);

/// Barrier-bouncing HMC with leapfrog and Metropolis correction.
StepOutcome bb_hmc_step_generic(ChainState chain, const HamiltonianSystem& sys,
                                const LimitState& g, double threshold, const SamplerConfig& cfg,
                                HitSolver solver);

// Component-wise MH in standard-normal space (uniform proposal of width mh_width).
StepOutcome cwmh_step_gaussian(ChainState chain, const LimitState& g, double threshold,
                               const SamplerConfig& cfg);
// Component-wise MH against a general target (joint-density ratio per coordinate).
StepOutcome cwmh_step(ChainState chain, const TargetDensity& target, const LimitState& g,
                      double threshold, const SamplerConfig& cfg);
// Block random-walk MH: uniform square proposal of width mh_width, joint ratio.
StepOutcome block_mh_step(ChainState chain, const TargetDensity& target, const LimitState& g,
                          double threshold, const SamplerConfig& cfg);

enum class AdaptMode { rs, bb };

// Trajectory-length update from a batch acceptance rate. `period` is 2 pi in
// standard-normal space or the U-turn mean period for general targets.
double adapt_tf(double current_tf, double acceptance_rate, double period,
                const SamplerConfig& cfg, AdaptMode mode);

struct MeanPeriod {
  double mean = 0.0;
  int used = 0;
  int excluded = 0;
};

// U-turn based mean period over `states`. Throws EstimationError if every
// state hits the step cap or leaves the support.
MeanPeriod estimate_mean_period(const HamiltonianSystem& sys, const std::vector<PhaseState>& states,
                                double dt, int step_cap = 10000);

}  // namespace hmcss
