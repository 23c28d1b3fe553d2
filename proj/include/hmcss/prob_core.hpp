#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "hmcss/random_stream.hpp"

namespace hmcss {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Log-density with gradient. Outside the support `in_support` is false,
/// `log_density` is -inf and the gradient is zero; samplers treat that as an
/// infinite potential barrier instead of an error.
struct DensityValue {
  double log_density = -kInf;
  Vector gradient;
  bool in_support = false;

  static DensityValue out_of_support(Eigen::Index dim) {
    return {-kInf, Vector::Zero(dim), false};
  }
};

/// Differentiable, possibly unnormalized, log-density. The gradient is an
/// explicit capability: gradient-free kernels run against targets without it.
class TargetDensity {
 public:
  using LogFn = std::function<double(const Vector&)>;
  using LogGradFn = std::function<DensityValue(const Vector&)>;

  TargetDensity(std::size_t dim, std::string label, LogFn log_density,
                LogGradFn log_density_grad = {});

  std::size_t dim() const { return dim_; }
  const std::string& label() const { return label_; }
  bool has_gradient() const { return static_cast<bool>(log_density_grad_); }

  double log_density(const Vector& q) const { return log_density_(q); }
  // Throws CapabilityError when the target has no gradient.
  DensityValue log_density_grad(const Vector& q) const;

 private:
  std::size_t dim_;
  std::string label_;
  LogFn log_density_;
  LogGradFn log_density_grad_;
};

// Normalized standard-normal log-density and its gradient (-u).
// Throws std::domain_error for non-finite input.
DensityValue std_normal_logpdf_grad(const Vector& u);

// Unnormalized standard normal (constants dropped): log pi = -u.u/2.
TargetDensity standard_normal_target(std::size_t dim);

/// Correlated lognormal vector q = exp(g), g ~ N(mu_g, sigma_g), built from
/// physical means, coefficients of variation and the lognormal correlation
/// matrix by the closed-form Nataf mapping for lognormal marginals.
class CorrelatedLognormal {
 public:
  const Vector& means() const { return means_; }
  const Vector& covs() const { return covs_; }
  const Matrix& corr() const { return corr_; }
  const Vector& mu_g() const { return mu_g_; }
  const Matrix& sigma_g() const { return sigma_g_; }
  const Matrix& cholesky_lower() const { return chol_lower_; }
  // Correlation matrix of the underlying Gaussian.
  Matrix corr_g() const;
  std::size_t dim() const { return static_cast<std::size_t>(means_.size()); }

  Vector sample(RandomStream& stream) const;

 private:
  friend CorrelatedLognormal lognormal_from_moments(const Vector& means, const Vector& covs,
                                                    const Matrix& corr);
  friend DensityValue lognormal_logpdf_grad(const CorrelatedLognormal& model, const Vector& q);

  Vector means_;
  Vector covs_;
  Matrix corr_;
  Vector mu_g_;
  Matrix sigma_g_;
  Matrix chol_lower_;
  Eigen::LLT<Matrix> llt_;
  double log_norm_ = 0.0;  // -n/2 ln(2 pi) - 1/2 ln det(sigma_g)
};

// Throws std::invalid_argument on bad moments and when sigma_g is not
// positive definite (naming the offending variable pair).
CorrelatedLognormal lognormal_from_moments(const Vector& means, const Vector& covs,
                                           const Matrix& corr);

// Normalized change-of-variables density; any q_i <= 0 is out of support.
DensityValue lognormal_logpdf_grad(const CorrelatedLognormal& model, const Vector& q);

TargetDensity lognormal_target(const CorrelatedLognormal& model);

}  // namespace hmcss
