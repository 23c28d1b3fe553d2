#pragma once

#include <cstdint>
#include <vector>

#include "hmcss/prob_core.hpp"

namespace hmcss {

// Position-momentum pair of equal dimension.
struct PhaseState {
  Vector q;
  Vector p;
};

/// Diagonal mass matrix M (identity by default). K(p) = p . M^-1 p / 2.
class MassMatrix {
 public:
  explicit MassMatrix(Vector diag);
  static MassMatrix identity(Eigen::Index n) { return MassMatrix(Vector::Ones(n)); }

  const Vector& diag() const { return diag_; }
  Eigen::Index dim() const { return diag_.size(); }
  bool is_identity() const { return (diag_.array() == 1.0).all(); }

  double kinetic(const Vector& p) const;
  // dq/dt = M^-1 p
  Vector velocity(const Vector& p) const;
  // p ~ N(0, M)
  Vector sample_momentum(RandomStream& stream) const;

 private:
  Vector diag_;
};

/// V(q) = -log pi(q), K(p) = p . M^-1 p / 2.
struct HamiltonianSystem {
  TargetDensity target;
  MassMatrix mass;
};

// +inf outside the target support.
double potential(const HamiltonianSystem& sys, const Vector& q);
double hamiltonian(const HamiltonianSystem& sys, const PhaseState& s);

// Exact flow of H = u.u/2 + p.p/2 (standard-normal space, M = I).
PhaseState analytic_flow(const PhaseState& s, double t);

struct LeapfrogResult {
  PhaseState state;
  bool diverged = false;  // an intermediate q left the support; state is the last good one
  int steps_taken = 0;
};

/// Single-step leapfrog integrator that caches grad V between steps.
class LeapfrogIntegrator {
 public:
  // Throws CapabilityError for a gradient-less target.
  LeapfrogIntegrator(const HamiltonianSystem& sys, double dt);

  // Positions the integrator at `s`. Returns false when s.q is outside the support.
  bool reset(const PhaseState& s);
  // One step of size dt (or `h` when given). Returns false, leaving the
  // state untouched, when the new position leaves the support.
  bool step();
  bool step(double h);

  const PhaseState& state() const { return state_; }
  // V at the current position.
  double potential() const { return potential_; }
  double dt() const { return dt_; }

 private:
  const HamiltonianSystem* sys_;
  double dt_;
  PhaseState state_;
  Vector grad_v_;  // grad V at state_.q
  double potential_ = 0.0;
};

LeapfrogResult leapfrog(const HamiltonianSystem& sys, const PhaseState& s, double dt, int steps);

// Number of leapfrog steps covering time t: nearest integer, at least 1.
int leapfrog_steps(double t, double dt);

// p_a = p_b - 2 (p_b . v) v. A non-unit v is normalized and counted in
// reflection_normalization_warnings().
Vector reflect_momentum(const Vector& p_b, const Vector& v);
std::uint64_t reflection_normalization_warnings();

}  // namespace hmcss
