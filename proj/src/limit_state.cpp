#include "hmcss/limit_state.hpp"

#include <stdexcept>
#include <utility>

#include "hmcss/errors.hpp"

namespace hmcss {

LimitState::LimitState(std::size_t dim, std::string label, ValueFn value,
                       GradFn value_and_gradient, CrossingFn analytic_crossing)
    : dim_(dim),
      label_(std::move(label)),
      value_(std::move(value)),
      value_and_gradient_(std::move(value_and_gradient)),
      analytic_crossing_(std::move(analytic_crossing)) {
  if (dim_ == 0) throw std::invalid_argument("limit state dimension must be positive");
  if (!value_) throw std::invalid_argument("limit state needs a value function");
}

double LimitState::value_and_gradient(const Vector& u, Vector& grad) const {
  if (!value_and_gradient_) {
    throw CapabilityError("limit state '" + label_ + "' does not provide a gradient");
  }
  return value_and_gradient_(u, grad);
}

AnalyticCrossing LimitState::analytic_crossing(const Vector& u0, const Vector& p0,
                                               double threshold, double t_f) const {
  if (!analytic_crossing_) {
    throw CapabilityError("limit state '" + label_ + "' has no closed-form hitting time");
  }
  return analytic_crossing_(u0, p0, threshold, t_f);
}

LimitState with_evaluation_counter(const LimitState& g,
                                   std::shared_ptr<std::atomic<std::uint64_t>> counter) {
  LimitState::ValueFn value = [g, counter](const Vector& u) {
    counter->fetch_add(1, std::memory_order_relaxed);
    return g(u);
  };
  LimitState::GradFn grad;
  if (g.has_gradient()) {
    grad = [g, counter](const Vector& u, Vector& out) {
      counter->fetch_add(1, std::memory_order_relaxed);
      return g.value_and_gradient(u, out);
    };
  }
  LimitState::CrossingFn crossing;
  if (g.has_analytic_crossing()) {
    crossing = [g](const Vector& u0, const Vector& p0, double b, double t_f) {
      return g.analytic_crossing(u0, p0, b, t_f);
    };
  }
  return LimitState(g.dim(), g.label(), std::move(value), std::move(grad), std::move(crossing));
}

}  // namespace hmcss
