#include "hmcss/benchmarks.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <set>

#include "hmcss/errors.hpp"

namespace hmcss {

double normal_tail(double beta) { return 0.5 * std::erfc(beta / std::numbers::sqrt2); }

double linear_g(const LinearProblem& p, const Vector& u) {
  return p.beta0 - u.sum() / std::sqrt(static_cast<double>(u.size()));
}

double nonlinear_g(const NonlinearProblem& p, const Vector& u, Vector* grad) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(u.size()));
  const double d = u[0] - u[1];
  if (grad) {
    grad->setConstant(u.size(), -scale);
    (*grad)[0] -= 0.5 * p.kappa * d;
    (*grad)[1] += 0.5 * p.kappa * d;
  }
  return p.beta0 - scale * u.sum() - 0.25 * p.kappa * d * d;
}

namespace {

void check_dim(const Vector& u, int n, const char* what) {
  if (u.size() != n) {
    throw std::invalid_argument(std::string(what) + ": expected dimension " + std::to_string(n) +
                                ", got " + std::to_string(u.size()));
  }
}

Problem standard_normal_problem(std::string label, LimitState g, int n) {
  Problem pr{std::move(label), std::move(g), standard_normal_target(static_cast<std::size_t>(n)),
             MassMatrix::identity(n), false, {}, std::nullopt};
  pr.standard_normal = true;
  pr.sample = [n](RandomStream& s) { return s.normal_vector(n); };
  pr.chain_start = Vector::Zero(n);
  return pr;
}

}  // namespace

LimitState linear_limit_state(const LinearProblem& p) {
  if (p.n < 1) throw ConfigError("linear: n must be positive");
  const int n = p.n;
  const double beta0 = p.beta0;
  auto value = [p](const Vector& u) {
    check_dim(u, p.n, "linear");
    return linear_g(p, u);
  };
  auto grad = [p](const Vector& u, Vector& out) {
    check_dim(u, p.n, "linear");
    out.setConstant(p.n, -1.0 / std::sqrt(static_cast<double>(p.n)));
    return linear_g(p, u);
  };
  auto crossing = [beta0, n](const Vector& u0, const Vector& p0, double threshold, double t_f) {
    // G(u(t)) <= b  <=>  s(t) >= beta0 - b with s(t) = sum(u(t))/sqrt(n).
    const double level = beta0 - threshold;
    AnalyticCrossing c;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const double s_end = (std::sin(t_f) * p0.sum() + std::cos(t_f) * u0.sum()) * scale;
    c.end_inside = s_end >= level;
    c.first_exit = analytic_hit_time_linear(level, u0, p0, t_f);
    if (c.first_exit) c.exit_gradient = Vector::Constant(n, -scale);
    return c;
  };
  return LimitState(static_cast<std::size_t>(n), "linear", value, grad, crossing);
}

LimitState nonlinear_limit_state(const NonlinearProblem& p) {
  if (p.n < 2) throw ConfigError("nonlinear: n must be at least 2");
  auto value = [p](const Vector& u) {
    check_dim(u, p.n, "nonlinear");
    return nonlinear_g(p, u);
  };
  auto grad = [p](const Vector& u, Vector& out) {
    check_dim(u, p.n, "nonlinear");
    return nonlinear_g(p, u, &out);
  };
  return LimitState(static_cast<std::size_t>(p.n), "nonlinear", value, grad);
}

Problem make_linear_problem(const LinearProblem& p) {
  return standard_normal_problem("linear", linear_limit_state(p), p.n);
}

Problem make_nonlinear_problem(const NonlinearProblem& p) {
  return standard_normal_problem("nonlinear", nonlinear_limit_state(p), p.n);
}

std::optional<double> nonlinear_reference_pf(double kappa) {
  static const std::pair<double, double> table[] = {{0.2, 6.41e-5}, {0.6, 1.41e-3},
                                                    {1.0, 8.99e-3}, {-1.0, 1.37e-5},
                                                    {-5.0, 6.62e-6}, {-10.0, 4.73e-6}};
  for (const auto& [k, pf] : table) {
    if (std::abs(k - kappa) < 1e-12) return pf;
  }
  if (kappa == 0.0) return normal_tail(4.0);
  return std::nullopt;
}

double SdofProblem::omega0() const { return std::sqrt(k / m); }
double SdofProblem::natural_period() const { return 2.0 * std::numbers::pi / omega0(); }

SdofModel::SdofModel(const SdofProblem& p) : p_(p) {
  if (p.n < 2 || p.n % 2 != 0) throw ConfigError("sdof: n must be a positive even number");
  if (!(p.dt_resp > 0.0) || !(p.duration > 0.0)) {
    throw ConfigError("sdof: duration and response step must be positive");
  }
  const int nf = p.n / 2;
  const auto nt = static_cast<int>(std::lround(p.duration / p.dt_resp));
  const double dw = p.omega_cut / nf;
  const double sigma = std::sqrt(2.0 * p.s * dw);
  const double w0 = p.omega0();
  const double zw = p.zeta * w0;
  const double wd = w0 * std::sqrt(1.0 - p.zeta * p.zeta);
  times_.resize(nt);
  for (int k = 0; k < nt; ++k) times_[k] = (k + 1) * p.dt_resp;
  a_c_.resize(nt, nf);
  a_s_.resize(nt, nf);
  for (int j = 0; j < nf; ++j) {
    const double w = (j + 1) * dw;
    const double re = w0 * w0 - w * w;
    const double im = 2.0 * zw * w;
    const double den = re * re + im * im;
    // Steady state of x'' + 2 zeta w0 x' + w0^2 x = -sigma cos(w t) (resp. sin).
    const double cc = -sigma * re / den, cs = -sigma * im / den;
    const double sc = sigma * im / den, ss = -sigma * re / den;
    // Homogeneous part restoring x(0) = x'(0) = 0.
    const double ac = -cc, bc = (-cs * w + zw * ac) / wd;
    const double as = -sc, bs = (-ss * w + zw * as) / wd;
    for (int k = 0; k < nt; ++k) {
      const double t = times_[k];
      const double c = std::cos(w * t), s = std::sin(w * t);
      const double decay = std::exp(-zw * t);
      const double cd = std::cos(wd * t), sd = std::sin(wd * t);
      a_c_(k, j) = cc * c + cs * s + decay * (ac * cd + bc * sd);
      a_s_(k, j) = sc * c + ss * s + decay * (as * cd + bs * sd);
    }
  }
}

Vector SdofModel::response(const Vector& u) const {
  check_dim(u, p_.n, "sdof");
  const int nf = p_.n / 2;
  return a_c_ * u.head(nf) + a_s_ * u.tail(nf);
}

double SdofModel::response_max(const Vector& u) const {
  const Vector x = response(u);
  return p_.peak == PeakMode::absolute ? x.cwiseAbs().maxCoeff() : x.maxCoeff();
}

double SdofModel::g(const Vector& u) const { return p_.x - response_max(u); }

double sdof_response_max(const SdofModel& model, const Vector& u) {
  return model.response_max(u);
}

Problem make_sdof_problem(const SdofProblem& p) {
  auto model = std::make_shared<const SdofModel>(p);
  LimitState g(static_cast<std::size_t>(p.n), "sdof",
               [model](const Vector& u) { return model->g(u); });
  return standard_normal_problem("sdof", std::move(g), p.n);
}

Vector BananaProblem::mode() const { return (Vector(2) << 0.0, b * a * a).finished(); }

DensityValue banana_logpdf_grad(const BananaProblem& p, const Vector& xy) {
  if (!xy.allFinite()) throw std::domain_error("banana density: non-finite input");
  const double x = xy[0], y = xy[1];
  const double a2 = p.a * p.a;
  const double w = y - p.b * x * x / a2 - p.b * a2;
  const double dw_dx = -2.0 * p.b * x / a2;
  const double e = x * x / a2 + a2 * w * w - 2.0 * p.rho * x * w;
  const double de_dx = 2.0 * x / a2 + 2.0 * a2 * w * dw_dx - 2.0 * p.rho * (w + x * dw_dx);
  const double de_dy = 2.0 * a2 * w - 2.0 * p.rho * x;
  const double c = 1.0 / (2.0 * (1.0 - p.rho * p.rho));
  DensityValue out;
  out.in_support = true;
  out.log_density = -c * e;
  out.gradient = (Vector(2) << -c * de_dx, -c * de_dy).finished();
  return out;
}

Vector banana_sample(const BananaProblem& p, RandomStream& stream) {
  const double u1 = stream.normal();
  const double u2 = p.rho * u1 + std::sqrt(1.0 - p.rho * p.rho) * stream.normal();
  return (Vector(2) << u1 * p.a, u2 / p.a + p.b * (u1 * u1 + p.a * p.a)).finished();
}

double ellipse_g(const BananaProblem& p, const Vector& xy, Vector* grad) {
  const double ct = std::cos(p.theta), st = std::sin(p.theta);
  const double s = xy[0] * ct + xy[1] * st;
  const double d = xy[0] * st - xy[1] * ct;
  const double k1 = 1.0 / (p.c1 * p.c1), k2 = 1.0 / (p.c2 * p.c2);
  if (grad) {
    grad->resize(2);
    (*grad)[0] = -2.0 * s * ct * k1 - 2.0 * d * st * k2;
    (*grad)[1] = -2.0 * s * st * k1 + 2.0 * d * ct * k2;
  }
  return p.r * p.r - s * s * k1 - d * d * k2;
}

Problem make_banana_ellipse_problem(const BananaProblem& p) {
  if (!(std::abs(p.rho) < 1.0)) throw ConfigError("banana: |rho| must be below 1");
  if (p.a == 0.0) throw ConfigError("banana: a must be nonzero");
  LimitState g(
      2, "ellipse",
      [p](const Vector& xy) {
        check_dim(xy, 2, "ellipse");
        return ellipse_g(p, xy);
      },
      [p](const Vector& xy, Vector& out) {
        check_dim(xy, 2, "ellipse");
        return ellipse_g(p, xy, &out);
      });
  TargetDensity target(
      2, "banana", [p](const Vector& xy) { return banana_logpdf_grad(p, xy).log_density; },
      [p](const Vector& xy) { return banana_logpdf_grad(p, xy); });
  Problem pr{"banana-ellipse", std::move(g), std::move(target), MassMatrix::identity(2), false, {}, std::nullopt};
  pr.sample = [p](RandomStream& s) { return banana_sample(p, s); };
  pr.chain_start = p.mode();
  return pr;
}

std::optional<double> banana_reference_pf(double r) {
  static const std::pair<double, double> table[] = {
      {6.0, 2.63e-2}, {8.0, 6.85e-3}, {10.0, 1.90e-3}, {12.0, 4.91e-4}, {14.0, 1.36e-4}};
  for (const auto& [rr, pf] : table) {
    if (std::abs(rr - r) < 1e-12) return pf;
  }
  return std::nullopt;
}

namespace {

Vector story_shears(const ShearFrameProblem& p, double scale) {
  const Eigen::Index n = p.forces.size();
  Vector v(n);
  double acc = 0.0;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    acc += p.forces[i];
    v[i] = acc * scale;
  }
  return v;
}

double resolved_scale(const ShearFrameProblem& p) {
  return p.force_scale > 0.0 ? p.force_scale : calibrate_force_scale(p);
}

}  // namespace

double calibrate_force_scale(const ShearFrameProblem& p, double target_drift) {
  const Vector v = story_shears(p, 1.0);
  return target_drift / (v.array() / p.stiffness_means.array()).maxCoeff();
}

Vector frame_drifts(const ShearFrameProblem& p, const Vector& k) {
  if (k.size() != p.forces.size()) throw std::invalid_argument("frame_drifts: dimension mismatch");
  const Vector v = story_shears(p, resolved_scale(p));
  Vector d(k.size());
  for (Eigen::Index i = 0; i < k.size(); ++i) {
    if (!(k[i] > 0.0)) throw std::domain_error("frame_drifts: stiffness must be positive");
    d[i] = v[i] <= k[i] * p.u_y ? v[i] / k[i] : kInf;
  }
  return d;
}

CorrelatedLognormal frame_stiffness_model(const ShearFrameProblem& p) {
  const Eigen::Index n = p.stiffness_means.size();
  Matrix corr = Matrix::Constant(n, n, p.rho);
  corr.diagonal().setOnes();
  return lognormal_from_moments(p.stiffness_means, Vector::Constant(n, p.cov), corr);
}

Problem make_shear_frame_problem(const ShearFrameProblem& p) {
  if (p.forces.size() != p.stiffness_means.size()) {
    throw ConfigError("shear-frame: forces and stiffnesses differ in length");
  }
  ShearFrameProblem fixed = p;
  fixed.force_scale = resolved_scale(p);
  auto model = std::make_shared<const CorrelatedLognormal>(frame_stiffness_model(fixed));
  const Eigen::Index n = fixed.stiffness_means.size();
  LimitState g(static_cast<std::size_t>(n), "max-drift", [fixed](const Vector& k) {
    for (Eigen::Index i = 0; i < k.size(); ++i) {
      if (!(k[i] > 0.0)) return -kInf;
    }
    return fixed.x - frame_drifts(fixed, k).maxCoeff();
  });
  Vector mass_diag = Vector::Ones(n);
  if (fixed.scaled_mass) {
    mass_diag = (fixed.stiffness_means * fixed.cov).array().square().inverse().matrix();
  }
  Problem pr{"shear-frame", std::move(g), lognormal_target(*model), MassMatrix(mass_diag), false, {}, std::nullopt};
  pr.sample = [model](RandomStream& s) { return model->sample(s); };
  pr.chain_start = fixed.stiffness_means;
  return pr;
}

namespace {

double param(const BenchmarkParams& params, const BenchmarkInfo& info, const std::string& name) {
  auto it = params.find(name);
  return it != params.end() ? it->second : info.defaults.at(name);
}

const BenchmarkInfo& find_info(const std::string& id) {
  for (const auto& info : benchmark_registry()) {
    if (info.id == id) return info;
  }
  throw ConfigError("unknown benchmark '" + id + "'");
}

int as_int(double v, const char* name) {
  if (v != std::round(v) || v < 1.0) {
    throw ConfigError(std::string(name) + " must be a positive integer");
  }
  return static_cast<int>(v);
}

}  // namespace

const std::vector<BenchmarkInfo>& benchmark_registry() {
  static const std::vector<BenchmarkInfo> registry = {
      {"linear", "beta0 - sum(u)/sqrt(n) in standard-normal space", {{"beta0", 3.0}, {"n", 100}}},
      {"nonlinear",
       "beta0 - sum(u)/sqrt(n) - kappa/4 (u1 - u2)^2 in standard-normal space",
       {{"beta0", 4.0}, {"n", 100}, {"kappa", 1.0}}},
      {"sdof",
       "first passage of a linear oscillator under white-noise ground motion (200 variables)",
       {{"x", 0.020}, {"absolute", 0.0}, {"dt_resp", 0.01}}},
      {"banana-ellipse",
       "banana-shaped density, failure outside an ellipse of size r",
       {{"r", 6.0}, {"a", 1.15}, {"b", 0.5}, {"rho", 0.9}, {"c1", 1.0}, {"c2", 0.5},
        {"theta", std::numbers::pi / 4.0}}},
      {"shear-frame",
       "three-story elastic-perfectly-plastic shear frame, correlated lognormal stiffnesses",
       {{"x", 0.12}, {"force_scale", 0.0}, {"u_y", 0.04}, {"scaled_mass", 1.0}}},
  };
  return registry;
}

Problem make_benchmark(const std::string& id, const BenchmarkParams& params) {
  const BenchmarkInfo& info = find_info(id);
  for (const auto& [name, value] : params) {
    if (!info.defaults.count(name)) {
      throw ConfigError("benchmark '" + id + "' has no parameter '" + name + "'");
    }
  }
  auto get = [&](const std::string& name) { return param(params, info, name); };
  if (id == "linear") return make_linear_problem({get("beta0"), as_int(get("n"), "n")});
  if (id == "nonlinear") {
    return make_nonlinear_problem({get("beta0"), as_int(get("n"), "n"), get("kappa")});
  }
  if (id == "sdof") {
    SdofProblem p;
    p.x = get("x");
    p.dt_resp = get("dt_resp");
    p.peak = get("absolute") != 0.0 ? PeakMode::absolute : PeakMode::one_sided;
    return make_sdof_problem(p);
  }
  if (id == "banana-ellipse") {
    BananaProblem p;
    p.r = get("r");
    p.a = get("a");
    p.b = get("b");
    p.rho = get("rho");
    p.c1 = get("c1");
    p.c2 = get("c2");
    p.theta = get("theta");
    return make_banana_ellipse_problem(p);
  }
  ShearFrameProblem p;
  p.x = get("x");
  p.force_scale = get("force_scale");
  p.u_y = get("u_y");
  p.scaled_mass = get("scaled_mass") != 0.0;
  return make_shear_frame_problem(p);
}

std::optional<double> benchmark_reference_pf(const std::string& id, const BenchmarkParams& params) {
  const BenchmarkInfo& info = find_info(id);
  auto get = [&](const std::string& name) { return param(params, info, name); };
  if (id == "linear") return normal_tail(get("beta0"));
  if (id == "nonlinear") {
    if (get("kappa") == 0.0) return normal_tail(get("beta0"));
    if (get("beta0") == 4.0) return nonlinear_reference_pf(get("kappa"));
    return std::nullopt;
  }
  if (id == "banana-ellipse") {
    const BananaProblem def;
    if (get("a") == def.a && get("b") == def.b && get("rho") == def.rho && get("c1") == def.c1 &&
        get("c2") == def.c2 && std::abs(get("theta") - def.theta) < 1e-12) {
      return banana_reference_pf(get("r"));
    }
    return std::nullopt;
  }
  if (id == "sdof" && get("absolute") == 0.0) {
    if (get("x") == 0.020) return 6.8e-3;
    if (get("x") == 0.025) return 8.2e-5;
  }
  return std::nullopt;
}

std::string benchmark_primary_param(const std::string& id) {
  if (id == "linear") return "beta0";
  if (id == "nonlinear") return "kappa";
  if (id == "banana-ellipse") return "r";
  if (id == "sdof" || id == "shear-frame") return "x";
  throw ConfigError("unknown benchmark '" + id + "'");
}

}  // namespace hmcss
