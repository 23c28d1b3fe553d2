#include "hmcss/dynamics.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "hmcss/errors.hpp"

namespace hmcss {
namespace {
std::atomic<std::uint64_t> g_reflection_warnings{0};
}

MassMatrix::MassMatrix(Vector diag) : diag_(std::move(diag)) {
  if (diag_.size() == 0 || !(diag_.array() > 0.0).all() || !diag_.allFinite()) {
    throw std::invalid_argument("mass matrix diagonal must be positive and finite");
  }
}

double MassMatrix::kinetic(const Vector& p) const {
  return 0.5 * (p.array().square() / diag_.array()).sum();
}

Vector MassMatrix::velocity(const Vector& p) const { return (p.array() / diag_.array()).matrix(); }

Vector MassMatrix::sample_momentum(RandomStream& stream) const {
  return (stream.normal_vector(diag_.size()).array() * diag_.array().sqrt()).matrix();
}

double potential(const HamiltonianSystem& sys, const Vector& q) {
  const double lp = sys.target.log_density(q);
  return std::isfinite(lp) ? -lp : kInf;
}

double hamiltonian(const HamiltonianSystem& sys, const PhaseState& s) {
  if (s.q.size() != s.p.size() || s.q.size() != sys.mass.dim()) {
    throw std::invalid_argument("hamiltonian: dimension mismatch");
  }
  return potential(sys, s.q) + sys.mass.kinetic(s.p);
}

PhaseState analytic_flow(const PhaseState& s, double t) {
  const double c = std::cos(t);
  const double sn = std::sin(t);
  return {s.p * sn + s.q * c, s.p * c - s.q * sn};
}

LeapfrogIntegrator::LeapfrogIntegrator(const HamiltonianSystem& sys, double dt)
    : sys_(&sys), dt_(dt) {
  if (!sys.target.has_gradient()) {
    throw CapabilityError("leapfrog needs a target with gradient ('" + sys.target.label() + "')");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("leapfrog: dt must be positive");
}

bool LeapfrogIntegrator::reset(const PhaseState& s) {
  const DensityValue d = sys_->target.log_density_grad(s.q);
  if (!d.in_support) return false;
  state_ = s;
  grad_v_ = -d.gradient;
  potential_ = -d.log_density;
  return true;
}

bool LeapfrogIntegrator::step() { return step(dt_); }

bool LeapfrogIntegrator::step(double h) {
  const Vector p_half = state_.p - 0.5 * h * grad_v_;
  const Vector q_new = state_.q + h * sys_->mass.velocity(p_half);
  const DensityValue d = sys_->target.log_density_grad(q_new);
  if (!d.in_support) return false;
  state_.q = q_new;
  state_.p = p_half + 0.5 * h * d.gradient;
  grad_v_ = -d.gradient;
  potential_ = -d.log_density;
  return true;
}

LeapfrogResult leapfrog(const HamiltonianSystem& sys, const PhaseState& s, double dt, int steps) {
  if (steps < 1) throw std::invalid_argument("leapfrog: step count must be positive");
  LeapfrogIntegrator lf(sys, dt);
  if (!lf.reset(s)) throw std::invalid_argument("leapfrog: initial position outside support");
  LeapfrogResult out;
  for (int i = 0; i < steps; ++i) {
    if (!lf.step()) {
      out.diverged = true;
      break;
    }
    ++out.steps_taken;
  }
  out.state = lf.state();
  return out;
}

int leapfrog_steps(double t, double dt) {
  const auto l = static_cast<int>(std::lround(t / dt));
  return l < 1 ? 1 : l;
}

Vector reflect_momentum(const Vector& p_b, const Vector& v) {
  const double norm = v.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("reflect_momentum: zero direction vector");
  if (std::abs(norm - 1.0) > 1e-9) {
    g_reflection_warnings.fetch_add(1, std::memory_order_relaxed);
    const Vector unit = v / norm;
    return p_b - 2.0 * p_b.dot(unit) * unit;
  }
  return p_b - 2.0 * p_b.dot(v) * v;
}

std::uint64_t reflection_normalization_warnings() {
  return g_reflection_warnings.load(std::memory_order_relaxed);
}

}  // namespace hmcss
