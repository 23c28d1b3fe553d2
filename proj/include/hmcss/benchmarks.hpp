#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hmcss/limit_state.hpp"
#include "hmcss/prob_core.hpp"
#include "hmcss/subsim.hpp"

namespace hmcss {

// Phi(-beta)
double normal_tail(double beta);

/// beta0 - sum(u)/sqrt(n)
struct LinearProblem {
  double beta0 = 3.0;
  int n = 100;
};

/// beta0 - sum(u)/sqrt(n) - kappa/4 (u1 - u2)^2
struct NonlinearProblem {
  double beta0 = 4.0;
  int n = 100;
  double kappa = 1.0;
};

double linear_g(const LinearProblem& p, const Vector& u);
double nonlinear_g(const NonlinearProblem& p, const Vector& u, Vector* grad = nullptr);
LimitState linear_limit_state(const LinearProblem& p);
LimitState nonlinear_limit_state(const NonlinearProblem& p);
Problem make_linear_problem(const LinearProblem& p);
Problem make_nonlinear_problem(const NonlinearProblem& p);
// Tabulated exact values at beta0 = 4; nullopt for other curvatures.
std::optional<double> nonlinear_reference_pf(double kappa);

enum class PeakMode { one_sided, absolute };

/// Linear oscillator under spectrally represented white-noise ground motion.
struct SdofProblem {
  double m = 6e4;
  double k = 2e7;
  double zeta = 0.10;
  double s = 0.01;
  double omega_cut = 15.0 * 3.14159265358979323846;
  int n = 200;
  double duration = 10.0;
  double dt_resp = 0.01;
  double x = 0.020;
  PeakMode peak = PeakMode::one_sided;

  double omega0() const;
  double natural_period() const;
};

/// Precomputed response matrices: X(t_k) = A_c u + A_s ubar.
class SdofModel {
 public:
  explicit SdofModel(const SdofProblem& p);

  const SdofProblem& problem() const { return p_; }
  const Matrix& cos_response() const { return a_c_; }
  const Matrix& sin_response() const { return a_s_; }
  const Vector& times() const { return times_; }

  // X on the response grid.
  Vector response(const Vector& u) const;
  double response_max(const Vector& u) const;
  double g(const Vector& u) const;

 private:
  SdofProblem p_;
  Vector times_;
  Matrix a_c_;
  Matrix a_s_;
};

double sdof_response_max(const SdofModel& model, const Vector& u);
Problem make_sdof_problem(const SdofProblem& p);

/// Banana-shaped distribution with an elliptical limit state (failure outside).
struct BananaProblem {
  double a = 1.15;
  double b = 0.5;
  double rho = 0.9;
  double c1 = 1.0;
  double c2 = 0.5;
  double theta = 0.78539816339744830962;
  double r = 6.0;

  Vector mode() const;
};

// Unnormalized log density and gradient.
DensityValue banana_logpdf_grad(const BananaProblem& p, const Vector& xy);
// Transform of a correlated standard-normal pair.
Vector banana_sample(const BananaProblem& p, RandomStream& stream);
double ellipse_g(const BananaProblem& p, const Vector& xy, Vector* grad = nullptr);
Problem make_banana_ellipse_problem(const BananaProblem& p);
// Crude Monte Carlo values for r = 6, 8, ..., 14; nullopt otherwise.
std::optional<double> banana_reference_pf(double r);

/// Three-story elastic-perfectly-plastic shear frame under a static pushover.
struct ShearFrameProblem {
  Vector stiffness_means = (Vector(3) << 3.0e8, 2.8e8, 1.5e8).finished();
  double cov = 0.1;
  double rho = 0.6;
  double u_y = 0.04;
  Vector forces = (Vector(3) << 1.645e8, 2.585e8, 4.70e8).finished();
  // <= 0 selects the calibrated scale.
  double force_scale = 0.0;
  double x = 0.12;
  // Diagonal mass 1/sigma_k^2 per story; identity when false.
  bool scaled_mass = true;
};

// Scale at which the mean-stiffness elastic max drift equals `target_drift`.
double calibrate_force_scale(const ShearFrameProblem& p, double target_drift = 0.03);
// Interstory drifts; a story whose demand exceeds its yield shear reports +inf.
Vector frame_drifts(const ShearFrameProblem& p, const Vector& k);
CorrelatedLognormal frame_stiffness_model(const ShearFrameProblem& p);
Problem make_shear_frame_problem(const ShearFrameProblem& p);

using BenchmarkParams = std::map<std::string, double>;

struct BenchmarkInfo {
  std::string id;
  std::string description;
  BenchmarkParams defaults;
};

const std::vector<BenchmarkInfo>& benchmark_registry();
// Throws ConfigError for unknown ids or parameter names.
Problem make_benchmark(const std::string& id, const BenchmarkParams& params);
// Reference failure probability when one is known in closed form or tabulated.
std::optional<double> benchmark_reference_pf(const std::string& id, const BenchmarkParams& params);
// Name of the parameter that varies across table rows.
std::string benchmark_primary_param(const std::string& id);

}  // namespace hmcss
