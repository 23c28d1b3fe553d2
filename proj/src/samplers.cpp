#include "hmcss/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hmcss/errors.hpp"

namespace hmcss {

std::string_view to_string(HitSolver s) {
  switch (s) {
    case HitSolver::secant:
      return "secant";
    case HitSolver::newton:
      return "newton";
    case HitSolver::analytic:
      return "analytic";
  }
  return "?";
}

HitSolver hit_solver_from_string(std::string_view name) {
  if (name == "secant") return HitSolver::secant;
  if (name == "newton") return HitSolver::newton;
  if (name == "analytic") return HitSolver::analytic;
  throw ConfigError("unknown hit solver '" + std::string(name) + "'");
}

void SamplerConfig::validate(bool gaussian_path) const {
  if (!(t_f > 0.0)) throw ConfigError("t_f must be positive");
  if (gaussian_path && std::abs(t_f - 2.0 * std::numbers::pi) < 1e-12) {
    throw ConfigError("t_f = 2 pi makes the exact flow periodic");
  }
  if (!(alpha >= -1.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [-1, 1]");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(0.0 < a_low && a_low < a_up && a_up < 1.0)) {
    throw ConfigError("need 0 < a_low < a_up < 1");
  }
  if (!(0.0 < a_star && a_star < 1.0)) throw ConfigError("need 0 < a_star < 1");
  if (n_a < 1) throw ConfigError("n_a must be positive");
  if (!(toll > 0.0)) throw ConfigError("toll must be positive");
  if (max_iter < 1) throw ConfigError("max_iter must be positive");
  if (!(mh_width > 0.0)) throw ConfigError("mh_width must be positive");
  if (period_step_cap < 1) throw ConfigError("period_step_cap must be positive");
}

Vector combine_momentum(double alpha, const Vector& p_star, const Vector& p_rand) {
  if (p_star.size() == 0 || alpha == 0.0) return p_rand;
  return alpha * p_star + std::sqrt(1.0 - alpha * alpha) * p_rand;
}

Vector draw_momentum(RandomStream& stream, const MassMatrix& mass, double alpha,
                     const Vector& p_star) {
  return combine_momentum(alpha, p_star, mass.sample_momentum(stream));
}

namespace {

void require_inside(const ChainState& chain, double threshold) {
  if (!(chain.g_value <= threshold)) {
    throw std::invalid_argument("kernel step: seed lies outside the conditional domain (G = " +
                                std::to_string(chain.g_value) +
                                " > threshold = " + std::to_string(threshold) + ")");
  }
}

StepOutcome accept(ChainState chain, Vector q, double g_value, Vector p_end, int evals) {
  chain.position = std::move(q);
  chain.g_value = g_value;
  chain.last_momentum = std::move(p_end);
  return {std::move(chain), true, evals, false, false};
}

// The chain stays; the refreshment momentum is the negated initial momentum.
StepOutcome reject(ChainState chain, const Vector& p_init, int evals) {
  chain.last_momentum = -p_init;
  return {std::move(chain), false, evals, false, false};
}

// Unit vector along -grad G.
Vector inward_normal(const Vector& grad) {
  const double n = grad.norm();
  if (!(n > 0.0)) throw std::domain_error("limit-state gradient vanishes at the bounce point");
  return -grad / n;
}

// Secant-direction surrogate for the bounce normal, oriented against p_b.
Vector secant_direction(const Vector& u_last, const Vector& u_prev, const Vector& p_b) {
  Vector v = u_last - u_prev;
  const double n = v.norm();
  if (!(n > 0.0)) v = p_b;
  v.normalize();
  if (p_b.dot(v) > 0.0) v = -v;
  return v;
}

// Reflection that preserves K = p.M^-1 p / 2 for diagonal M.
Vector reflect_with_mass(const Vector& p_b, const Vector& v, const MassMatrix& mass) {
  if (mass.is_identity()) return reflect_momentum(p_b, v);
  const Vector minv_v = mass.velocity(v);
  return p_b - 2.0 * p_b.dot(minv_v) / v.dot(minv_v) * v;
}

bool metropolis_accepts(double u, double h_init, double h_new) {
  return std::isfinite(h_new) && u < std::min(1.0, std::exp(h_init - h_new));
}

}  // namespace

StepOutcome rs_hmc_step_gaussian(ChainState chain, const LimitState& g, double threshold,
                                 const SamplerConfig& cfg) {
  require_inside(chain, threshold);
  const auto n = chain.position.size();
  const Vector p0 =
      draw_momentum(chain.stream, MassMatrix::identity(n), cfg.alpha, chain.last_momentum);
  PhaseState end = analytic_flow({chain.position, p0}, cfg.t_f);
  const double gv = g(end.q);
  if (gv <= threshold) return accept(std::move(chain), std::move(end.q), gv, std::move(end.p), 1);
  return reject(std::move(chain), p0, 1);
}

StepOutcome bb_hmc_step_gaussian(ChainState chain, const LimitState& g, double threshold,
                                 const SamplerConfig& cfg, HitSolver solver) {
  require_inside(chain, threshold);
  if (solver == HitSolver::newton && !g.has_gradient()) {
    throw CapabilityError("Newton hitting time needs a limit-state gradient");
  }
  const auto n = chain.position.size();
  const Vector p0 =
      draw_momentum(chain.stream, MassMatrix::identity(n), cfg.alpha, chain.last_momentum);
  const PhaseState init{chain.position, p0};

  if (solver == HitSolver::analytic) {
    const AnalyticCrossing cross = g.analytic_crossing(chain.position, p0, threshold, cfg.t_f);
    if (cross.end_inside || !cross.first_exit) {
      PhaseState end = analytic_flow(init, cfg.t_f);
      const double gv = g(end.q);
      if (gv <= threshold) {
        return accept(std::move(chain), std::move(end.q), gv, std::move(end.p), 1);
      }
      return reject(std::move(chain), p0, 1);
    }
    const double t_h = *cross.first_exit;
    const PhaseState sb = analytic_flow(init, t_h);
    const PhaseState sa{sb.q, reflect_momentum(sb.p, inward_normal(cross.exit_gradient))};
    PhaseState end = analytic_flow(sa, cfg.t_f - t_h);
    const double gv = g(end.q);
    StepOutcome out = gv <= threshold
                          ? accept(std::move(chain), std::move(end.q), gv, std::move(end.p), 1)
                          : reject(std::move(chain), p0, 1);
    out.bounced = true;
    return out;
  }

  PhaseState end = analytic_flow(init, cfg.t_f);
  const double g1 = g(end.q);
  int evals = 1;
  if (g1 <= threshold) {
    return accept(std::move(chain), std::move(end.q), g1, std::move(end.p), evals);
  }

  const double g0s = chain.g_value - threshold;
  const double g1s = g1 - threshold;
  HitTime hit;
  if (solver == HitSolver::secant) {
    hit = secant_hit_time(
        [&](double t) { return g(analytic_flow(init, t).q) - threshold; }, 0.0, cfg.t_f, g0s,
        g1s, cfg);
  } else {
    hit = newton_hit_time(
        [&](double t) {
          const PhaseState s = analytic_flow(init, t);
          NewtonPoint pt;
          pt.g = g.value_and_gradient(s.q, pt.gradient) - threshold;
          pt.dgdt = pt.gradient.dot(s.p);
          return pt;
        },
        0.0, cfg.t_f, g0s, g1s, cfg);
  }
  evals += hit.g_evals;
  const double remaining = cfg.t_f - hit.t_h;
  if (!hit.converged || !(remaining > 0.0)) return reject(std::move(chain), p0, evals);

  const PhaseState sb = analytic_flow(init, hit.t_h);
  Vector v;
  if (solver == HitSolver::secant) {
    v = secant_direction(sb.q, analytic_flow(init, hit.t_prev).q, sb.p);
  } else {
    Vector grad;
    if (hit.gradient) {
      grad = *hit.gradient;
    } else {
      g.value_and_gradient(sb.q, grad);
      ++evals;
    }
    v = inward_normal(grad);
  }
  const PhaseState sa{sb.q, reflect_momentum(sb.p, v)};
  PhaseState end2 = analytic_flow(sa, remaining);
  const double g2 = g(end2.q);
  ++evals;
  StepOutcome out = g2 <= threshold
                        ? accept(std::move(chain), std::move(end2.q), g2, std::move(end2.p), evals)
                        : reject(std::move(chain), p0, evals);
  out.bounced = true;
  return out;
}

StepOutcome rs_hmc_step_generic(ChainState chain, const HamiltonianSystem& sys,
                                const LimitState& g, double threshold, const SamplerConfig& cfg) {
  require_inside(chain, threshold);
  LeapfrogIntegrator lf(sys, cfg.dt);
  const Vector p0 = draw_momentum(chain.stream, sys.mass, cfg.alpha, chain.last_momentum);
  if (!lf.reset({chain.position, p0})) {
    throw std::invalid_argument("rs_hmc_step_generic: seed outside the target support");
  }
  const double h0 = lf.potential() + sys.mass.kinetic(p0);
  const int steps = leapfrog_steps(cfg.t_f, cfg.dt);
  for (int i = 0; i < steps; ++i) {
    if (!lf.step()) {
      StepOutcome out = reject(std::move(chain), p0, 0);
      out.diverged = true;
      return out;
    }
  }
  const double h1 = lf.potential() + sys.mass.kinetic(lf.state().p);
  const double gv = g(lf.state().q);
  const double u = chain.stream.uniform();
  if (gv <= threshold && metropolis_accepts(u, h0, h1)) {
    return accept(std::move(chain), lf.state().q, gv, lf.state().p, 1);
  }
  return reject(std::move(chain), p0, 1);
}

namespace {

struct LeftSupport {};

// Leapfrog trajectory with stored grid states; positions between grid points
// are reached with one fractional step from the preceding grid state.
class StoredTrajectory {
 public:
  StoredTrajectory(const HamiltonianSystem& sys, double dt) : lf_(sys, dt), dt_(dt) {}

  // Integrates `steps` steps; false if the trajectory leaves the support.
  bool build(const PhaseState& start, int steps) {
    grid_.clear();
    if (!lf_.reset(start)) return false;
    grid_.push_back(lf_.state());
    potentials_.assign(1, lf_.potential());
    for (int i = 0; i < steps; ++i) {
      if (!lf_.step()) return false;
      grid_.push_back(lf_.state());
      potentials_.push_back(lf_.potential());
    }
    return true;
  }

  const PhaseState& end() const { return grid_.back(); }
  double end_potential() const { return potentials_.back(); }

  PhaseState at(double t) {
    const int last = static_cast<int>(grid_.size()) - 1;
    int k = static_cast<int>(std::floor(t / dt_));
    k = std::clamp(k, 0, last);
    const double h = t - k * dt_;
    if (k == last || h < 1e-14) return grid_[k];
    lf_.reset(grid_[k]);
    if (!lf_.step(h)) throw LeftSupport{};
    return lf_.state();
  }

 private:
  LeapfrogIntegrator lf_;
  double dt_;
  std::vector<PhaseState> grid_;
  std::vector<double> potentials_;
};

}  // namespace

StepOutcome bb_hmc_step_generic(ChainState chain, const HamiltonianSystem& sys,
                                const LimitState& g, double threshold, const SamplerConfig& cfg,
                                HitSolver solver) {
  require_inside(chain, threshold);
  if (solver == HitSolver::analytic) {
    throw CapabilityError("closed-form hitting times exist only for the exact Gaussian flow");
  }
  if (solver == HitSolver::newton && !g.has_gradient()) {
    throw CapabilityError("Newton hitting time needs a limit-state gradient");
  }
  const Vector p0 = draw_momentum(chain.stream, sys.mass, cfg.alpha, chain.last_momentum);
  const int steps = leapfrog_steps(cfg.t_f, cfg.dt);
  const double t_end = steps * cfg.dt;
  StoredTrajectory traj(sys, cfg.dt);
  {
    LeapfrogIntegrator probe(sys, cfg.dt);
    if (!probe.reset({chain.position, p0})) {
      throw std::invalid_argument("bb_hmc_step_generic: seed outside the target support");
    }
  }
  if (!traj.build({chain.position, p0}, steps)) {
    StepOutcome out = reject(std::move(chain), p0, 0);
    out.diverged = true;
    return out;
  }
  const double h0 = potential(sys, chain.position) + sys.mass.kinetic(p0);
  const PhaseState first = traj.end();
  const double h1 = traj.end_potential() + sys.mass.kinetic(first.p);
  const double g1 = g(first.q);
  int evals = 1;
  const double u1 = chain.stream.uniform();
  if (g1 <= threshold) {
    if (metropolis_accepts(u1, h0, h1)) return accept(std::move(chain), first.q, g1, first.p, 1);
    return reject(std::move(chain), p0, evals);
  }

  const double g0s = chain.g_value - threshold;
  const double g1s = g1 - threshold;
  HitTime hit;
  try {
    if (solver == HitSolver::secant) {
      hit = secant_hit_time([&](double t) { return g(traj.at(t).q) - threshold; }, 0.0, t_end,
                            g0s, g1s, cfg);
    } else {
      hit = newton_hit_time(
          [&](double t) {
            const PhaseState s = traj.at(t);
            NewtonPoint pt;
            pt.g = g.value_and_gradient(s.q, pt.gradient) - threshold;
            pt.dgdt = pt.gradient.dot(sys.mass.velocity(s.p));
            return pt;
          },
          0.0, t_end, g0s, g1s, cfg);
    }
  } catch (const LeftSupport&) {
    StepOutcome out = reject(std::move(chain), p0, evals);
    out.diverged = true;
    return out;
  }
  evals += hit.g_evals;
  const double remaining = t_end - hit.t_h;
  if (!hit.converged || !(remaining > 0.0)) return reject(std::move(chain), p0, evals);

  const PhaseState sb = traj.at(hit.t_h);
  Vector v;
  if (solver == HitSolver::secant) {
    v = secant_direction(sb.q, traj.at(hit.t_prev).q, sb.p);
  } else {
    Vector grad;
    if (hit.gradient) {
      grad = *hit.gradient;
    } else {
      g.value_and_gradient(sb.q, grad);
      ++evals;
    }
    v = inward_normal(grad);
  }
  const PhaseState sa{sb.q, reflect_with_mass(sb.p, v, sys.mass)};

  const auto rest = static_cast<int>(std::lround(remaining / cfg.dt));
  LeapfrogIntegrator lf(sys, cfg.dt);
  lf.reset(sa);
  for (int i = 0; i < rest; ++i) {
    if (!lf.step()) {
      StepOutcome out = reject(std::move(chain), p0, evals);
      out.diverged = true;
      out.bounced = true;
      return out;
    }
  }
  const double h2 = lf.potential() + sys.mass.kinetic(lf.state().p);
  const double g2 = g(lf.state().q);
  ++evals;
  const double u2 = chain.stream.uniform();
  StepOutcome out = (g2 <= threshold && metropolis_accepts(u2, h0, h2))
                        ? accept(std::move(chain), lf.state().q, g2, lf.state().p, evals)
                        : reject(std::move(chain), p0, evals);
  out.bounced = true;
  return out;
}

namespace {

// Modified-MH domain test: the limit state is evaluated only when the
// candidate differs from the current position.
StepOutcome mh_domain_test(ChainState chain, Vector candidate, const LimitState& g,
                           double threshold) {
  if (candidate == chain.position) return {std::move(chain), false, 0, false, false};
  const double gv = g(candidate);
  if (gv <= threshold) {
    chain.position = std::move(candidate);
    chain.g_value = gv;
    return {std::move(chain), true, 1, false, false};
  }
  return {std::move(chain), false, 1, false, false};
}

}  // namespace

StepOutcome cwmh_step_gaussian(ChainState chain, const LimitState& g, double threshold,
                               const SamplerConfig& cfg) {
  require_inside(chain, threshold);
  Vector candidate = chain.position;
  for (Eigen::Index i = 0; i < candidate.size(); ++i) {
    const double cur = chain.position[i];
    const double xi = cur + cfg.mh_width * (chain.stream.uniform() - 0.5);
    const double ratio = std::exp(-0.5 * (xi * xi - cur * cur));
    if (chain.stream.uniform() < ratio) candidate[i] = xi;
  }
  return mh_domain_test(std::move(chain), std::move(candidate), g, threshold);
}

StepOutcome cwmh_step(ChainState chain, const TargetDensity& target, const LimitState& g,
                      double threshold, const SamplerConfig& cfg) {
  require_inside(chain, threshold);
  Vector candidate = chain.position;
  double lp = target.log_density(candidate);
  for (Eigen::Index i = 0; i < candidate.size(); ++i) {
    Vector trial = candidate;
    trial[i] += cfg.mh_width * (chain.stream.uniform() - 0.5);
    const double lp_trial = target.log_density(trial);
    const double u = chain.stream.uniform();
    if (std::isfinite(lp_trial) && u < std::exp(lp_trial - lp)) {
      candidate = std::move(trial);
      lp = lp_trial;
    }
  }
  return mh_domain_test(std::move(chain), std::move(candidate), g, threshold);
}

StepOutcome block_mh_step(ChainState chain, const TargetDensity& target, const LimitState& g,
                          double threshold, const SamplerConfig& cfg) {
  require_inside(chain, threshold);
  const auto n = chain.position.size();
  Vector trial =
      chain.position + cfg.mh_width * (chain.stream.uniform_vector(n).array() - 0.5).matrix();
  const double lp = target.log_density(chain.position);
  const double lp_trial = target.log_density(trial);
  const double u = chain.stream.uniform();
  if (!(std::isfinite(lp_trial) && u < std::exp(lp_trial - lp))) {
    return {std::move(chain), false, 0, false, false};
  }
  return mh_domain_test(std::move(chain), std::move(trial), g, threshold);
}

double adapt_tf(double current_tf, double acceptance_rate, double period,
                const SamplerConfig& cfg, AdaptMode mode) {
  if (!(acceptance_rate >= 0.0 && acceptance_rate <= 1.0)) {
    throw std::invalid_argument("adapt_tf: acceptance rate outside [0, 1]");
  }
  if (!(period > 0.0)) throw std::invalid_argument("adapt_tf: period must be positive");
  const double omega = 2.0 * std::numbers::pi / period;
  auto rescale = [&](double target_rate) {
    const double s = std::sin(omega * current_tf) * std::exp((acceptance_rate - target_rate) / 2.0);
    return std::asin(std::clamp(s, -1.0, 1.0)) / omega;
  };
  double tf = current_tf;
  if (mode == AdaptMode::rs) {
    if (acceptance_rate < cfg.a_low) {
      tf = rescale(cfg.a_low);
    } else if (acceptance_rate > cfg.a_up) {
      tf = rescale(cfg.a_up);
    }
  } else if (acceptance_rate < cfg.a_star) {
    tf = rescale(cfg.a_star);
  }
  return std::clamp(tf, 0.01 * period / 4.0, period / 4.0);
}

}  // namespace hmcss
