#include <string>

#include "hmcss/errors.hpp"
#include "hmcss/samplers.hpp"

namespace hmcss {

MeanPeriod estimate_mean_period(const HamiltonianSystem& sys, const std::vector<PhaseState>& states,
                                double dt, int step_cap) {
  if (!(dt > 0.0)) throw std::invalid_argument("estimate_mean_period: dt must be positive");
  MeanPeriod out;
  double total = 0.0;
  LeapfrogIntegrator fwd(sys, dt);
  LeapfrogIntegrator bwd(sys, dt);
  for (const PhaseState& s : states) {
    if (!fwd.reset(s) || !bwd.reset({s.q, -s.p})) {
      ++out.excluded;
      continue;
    }
    int turn = 0;
    for (int l = 1; l <= step_cap; ++l) {
      if (!fwd.step() || !bwd.step()) break;
      const Vector d = fwd.state().q - bwd.state().q;
      const Vector v_plus = sys.mass.velocity(fwd.state().p);
      const Vector v_minus = sys.mass.velocity(-bwd.state().p);
      if (v_plus.dot(d) < 0.0 && v_minus.dot(d) < 0.0) {
        turn = l;
        break;
      }
    }
    if (turn == 0) {
      ++out.excluded;
      continue;
    }
    // Forward and backward halves together span half an orbit.
    total += 2.0 * turn * dt;
    ++out.used;
  }
  if (out.used == 0) {
    throw EstimationError("mean period: all " + std::to_string(states.size()) +
                          " states hit the step cap or left the support");
  }
  out.mean = total / out.used;
  return out;
}

}  // namespace hmcss
