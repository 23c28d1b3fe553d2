#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "hmcss/prob_core.hpp"

namespace hmcss {

/// Closed-form crossing information of a limit state along the
/// standard-normal flow, when the limit state admits it.
struct AnalyticCrossing {
  std::optional<double> first_exit;  // smallest exit time in (0, t_f]
  bool end_inside = false;           // G(u(t_f)) <= threshold
  Vector exit_gradient;              // grad G at the exit point, when first_exit is set
};

/// Scalar performance function G; failure is G <= threshold.
class LimitState {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradFn = std::function<double(const Vector&, Vector&)>;
  using CrossingFn = std::function<AnalyticCrossing(const Vector& u0, const Vector& p0,
                                                    double threshold, double t_f)>;

  LimitState(std::size_t dim, std::string label, ValueFn value, GradFn value_and_gradient = {},
             CrossingFn analytic_crossing = {});

  std::size_t dim() const { return dim_; }
  const std::string& label() const { return label_; }
  bool has_gradient() const { return static_cast<bool>(value_and_gradient_); }
  bool has_analytic_crossing() const { return static_cast<bool>(analytic_crossing_); }

  double operator()(const Vector& u) const { return value_(u); }
  // Returns G(u) and writes grad G(u). Throws CapabilityError when absent.
  double value_and_gradient(const Vector& u, Vector& grad) const;
  // Closed-form flow crossing; evaluating it does not count as a G evaluation.
  AnalyticCrossing analytic_crossing(const Vector& u0, const Vector& p0, double threshold,
                                     double t_f) const;

 private:
  std::size_t dim_;
  std::string label_;
  ValueFn value_;
  GradFn value_and_gradient_;
  CrossingFn analytic_crossing_;
};

// Wraps every value / value_and_gradient call of `g` with an increment of
// `counter`. Used to reconcile reported NG against real evaluations.
LimitState with_evaluation_counter(const LimitState& g,
                                   std::shared_ptr<std::atomic<std::uint64_t>> counter);

}  // namespace hmcss
