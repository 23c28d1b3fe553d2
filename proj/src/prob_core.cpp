#include "hmcss/prob_core.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "hmcss/errors.hpp"

namespace hmcss {

TargetDensity::TargetDensity(std::size_t dim, std::string label, LogFn log_density,
                             LogGradFn log_density_grad)
    : dim_(dim),
      label_(std::move(label)),
      log_density_(std::move(log_density)),
      log_density_grad_(std::move(log_density_grad)) {
  if (dim_ == 0) throw std::invalid_argument("target density dimension must be positive");
  if (!log_density_) throw std::invalid_argument("target density needs a log-density");
}

DensityValue TargetDensity::log_density_grad(const Vector& q) const {
  if (!log_density_grad_) {
    throw CapabilityError("target '" + label_ + "' does not provide a gradient");
  }
  return log_density_grad_(q);
}

DensityValue std_normal_logpdf_grad(const Vector& u) {
  if (!u.allFinite()) throw std::domain_error("std_normal_logpdf_grad: non-finite input");
  const double n = static_cast<double>(u.size());
  return {-0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * u.squaredNorm(), -u, true};
}

TargetDensity standard_normal_target(std::size_t dim) {
  // Unnormalized: V(u) = u.u/2.
  return TargetDensity(
      dim, "std-normal", [](const Vector& u) { return -0.5 * u.squaredNorm(); },
      [](const Vector& u) {
        if (!u.allFinite()) throw std::domain_error("standard normal: non-finite input");
        return DensityValue{-0.5 * u.squaredNorm(), -u, true};
      });
}

Matrix CorrelatedLognormal::corr_g() const {
  const Vector sd = sigma_g_.diagonal().cwiseSqrt();
  return sd.cwiseInverse().asDiagonal() * sigma_g_ * sd.cwiseInverse().asDiagonal();
}

Vector CorrelatedLognormal::sample(RandomStream& stream) const {
  const Vector z = stream.normal_vector(mu_g_.size());
  return (mu_g_ + chol_lower_ * z).array().exp().matrix();
}

CorrelatedLognormal lognormal_from_moments(const Vector& means, const Vector& covs,
                                           const Matrix& corr) {
  const Eigen::Index n = means.size();
  if (n == 0 || covs.size() != n || corr.rows() != n || corr.cols() != n) {
    throw std::invalid_argument("lognormal_from_moments: inconsistent dimensions");
  }
  if ((means.array() <= 0.0).any() || (covs.array() <= 0.0).any()) {
    throw std::invalid_argument("lognormal_from_moments: means and covs must be positive");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(corr(i, i) - 1.0) > 1e-12) {
      throw std::invalid_argument("lognormal_from_moments: correlation diagonal must be 1");
    }
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::abs(corr(i, j) - corr(j, i)) > 1e-12) {
        throw std::invalid_argument("lognormal_from_moments: correlation must be symmetric");
      }
    }
  }

  CorrelatedLognormal m;
  m.means_ = means;
  m.covs_ = covs;
  m.corr_ = corr;
  const Vector var_g = (1.0 + covs.array().square()).log().matrix();
  const Vector sd_g = var_g.cwiseSqrt();
  m.mu_g_ = (means.array().log() - 0.5 * var_g.array()).matrix();
  m.sigma_g_.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) {
        m.sigma_g_(i, i) = var_g[i];
        continue;
      }
      const double rho_g = std::log1p(corr(i, j) * covs[i] * covs[j]) / (sd_g[i] * sd_g[j]);
      if (!(std::abs(rho_g) < 1.0)) {
        std::ostringstream msg;
        msg << "lognormal_from_moments: underlying Gaussian correlation of pair (" << i << ", "
            << j << ") is " << rho_g << ", not positive definite";
        throw std::invalid_argument(msg.str());
      }
      m.sigma_g_(i, j) = rho_g * sd_g[i] * sd_g[j];
    }
  }
  m.llt_.compute(m.sigma_g_);
  if (m.llt_.info() != Eigen::Success) {
    // Every 2x2 minor passed, so locate the first variable whose leading
    // minor breaks and report it with its most correlated predecessor.
    Eigen::Index bad = n - 1;
    for (Eigen::Index k = 2; k <= n; ++k) {
      Eigen::LLT<Matrix> lead(m.sigma_g_.topLeftCorner(k, k));
      if (lead.info() != Eigen::Success) {
        bad = k - 1;
        break;
      }
    }
    Eigen::Index partner = 0;
    for (Eigen::Index j = 1; j < bad; ++j) {
      if (std::abs(corr(bad, j)) > std::abs(corr(bad, partner))) partner = j;
    }
    std::ostringstream msg;
    msg << "lognormal_from_moments: underlying Gaussian covariance is not positive definite "
           "(pair ("
        << partner << ", " << bad << "))";
    throw std::invalid_argument(msg.str());
  }
  m.chol_lower_ = m.llt_.matrixL();
  const double log_det = 2.0 * m.chol_lower_.diagonal().array().log().sum();
  m.log_norm_ = -0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
  return m;
}

DensityValue lognormal_logpdf_grad(const CorrelatedLognormal& model, const Vector& q) {
  const Eigen::Index n = model.mu_g_.size();
  if (q.size() != n) throw std::invalid_argument("lognormal_logpdf_grad: dimension mismatch");
  if (!(q.array() > 0.0).all() || !q.allFinite()) return DensityValue::out_of_support(n);
  const Vector g = q.array().log().matrix();
  const Vector r = g - model.mu_g_;
  const Vector s = model.llt_.solve(r);
  DensityValue out;
  out.in_support = true;
  out.log_density = model.log_norm_ - 0.5 * r.dot(s) - g.sum();
  out.gradient = ((-s.array() - 1.0) / q.array()).matrix();
  return out;
}

TargetDensity lognormal_target(const CorrelatedLognormal& model) {
  return TargetDensity(
      model.dim(), "correlated-lognormal",
      [model](const Vector& q) { return lognormal_logpdf_grad(model, q).log_density; },
      [model](const Vector& q) { return lognormal_logpdf_grad(model, q); });
}

}  // namespace hmcss
