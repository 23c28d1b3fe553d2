#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hmcss/benchmarks.hpp"
#include "hmcss/errors.hpp"
#include "numdiff.hpp"
#include "stats.hpp"

using hmcss::RandomStream;
using hmcss::Vector;
using hmcss::testing::central_gradient;

namespace {

constexpr double kPi = std::numbers::pi;

Vector pair(double a, double b) { return (Vector(2) << a, b).finished(); }

// x'' + 2 zeta w0 x' + w0^2 x = -a(t), x(0) = x'(0) = 0, by classical RK4.
Vector rk4_sdof_response(const hmcss::SdofProblem& p, const Vector& u, double h) {
  const int nf = p.n / 2;
  const double dw = p.omega_cut / nf;
  const double sigma = std::sqrt(2.0 * p.s * dw);
  const double w0 = std::sqrt(p.k / p.m);
  auto accel = [&](double t) {
    double a = 0.0;
    for (int j = 0; j < nf; ++j) {
      const double w = (j + 1) * dw;
      a += u[j] * std::cos(w * t) + u[nf + j] * std::sin(w * t);
    }
    return sigma * a;
  };
  auto rhs = [&](double t, double x, double v, double& dx, double& dv) {
    dx = v;
    dv = -accel(t) - 2.0 * p.zeta * w0 * v - w0 * w0 * x;
  };
  const auto per = static_cast<int>(std::lround(p.dt_resp / h));
  const auto nt = static_cast<int>(std::lround(p.duration / p.dt_resp));
  Vector out(nt);
  double x = 0.0, v = 0.0, t = 0.0;
  for (int k = 0; k < nt; ++k) {
    for (int s = 0; s < per; ++s) {
      double k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v;
      rhs(t, x, v, k1x, k1v);
      rhs(t + h / 2, x + h / 2 * k1x, v + h / 2 * k1v, k2x, k2v);
      rhs(t + h / 2, x + h / 2 * k2x, v + h / 2 * k2v, k3x, k3v);
      rhs(t + h, x + h * k3x, v + h * k3v, k4x, k4v);
      x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
      v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
      t = (k * per + s + 1) * h;
    }
    out[k] = x;
  }
  return out;
}

}  // namespace

TEST_CASE("linear limit state") {
  const hmcss::LinearProblem p{3.0, 100};
  CHECK(hmcss::linear_g(p, Vector::Zero(100)) == 3.0);
  CHECK(std::abs(hmcss::linear_g(p, Vector::Constant(100, 0.3))) < 1e-12);
  CHECK(hmcss::normal_tail(4.0) == doctest::Approx(3.17e-5).epsilon(5e-3));
  CHECK(hmcss::normal_tail(3.0) == doctest::Approx(1.35e-3).epsilon(5e-3));

  const auto g = hmcss::linear_limit_state(p);
  RandomStream rs(1, 0);
  for (int i = 0; i < 20; ++i) {
    const Vector u = rs.normal_vector(100);
    Vector grad;
    CHECK(g.value_and_gradient(u, grad) == doctest::Approx(g(u)));
    const Vector fd = central_gradient([&](const Vector& x) { return g(x); }, u);
    CHECK(hmcss::testing::relative_error(grad, fd) <= 1e-6);
  }
  CHECK_THROWS(g(Vector::Zero(3)));
}

TEST_CASE("nonlinear limit state") {
  const hmcss::NonlinearProblem p{4.0, 100, 1.0};
  const hmcss::NonlinearProblem flat{4.0, 100, 0.0};
  RandomStream rs(2, 0);
  for (int i = 0; i < 20; ++i) {
    Vector u = rs.normal_vector(100);
    CHECK(hmcss::nonlinear_g(flat, u) == doctest::Approx(hmcss::linear_g({4.0, 100}, u)).epsilon(1e-14));
    Vector grad;
    const double v = hmcss::nonlinear_g(p, u, &grad);
    CHECK(v == hmcss::nonlinear_g(p, u));
    const Vector fd = central_gradient([&](const Vector& x) { return hmcss::nonlinear_g(p, x); }, u);
    CHECK(hmcss::testing::relative_error(grad, fd) <= 1e-6);
    u[1] = u[0];
    CHECK(hmcss::nonlinear_g(p, u) == doctest::Approx(hmcss::linear_g({4.0, 100}, u)));
  }
  CHECK(*hmcss::nonlinear_reference_pf(1.0) == 8.99e-3);
  CHECK_FALSE(hmcss::nonlinear_reference_pf(0.3));

  // Tabulated exact values against crude Monte Carlo where reachable.
  for (double kappa : {1.0, 0.6}) {
    const auto problem = hmcss::make_nonlinear_problem({4.0, 100, kappa});
    const auto mc = hmcss::crude_monte_carlo(problem, 200000, RandomStream(3, 0));
    CAPTURE(kappa);
    CHECK(std::abs(mc.pf - *hmcss::nonlinear_reference_pf(kappa)) <= 3.0 * mc.std_error);
  }
}

TEST_CASE("sdof oscillator") {
  const hmcss::SdofProblem p;
  const hmcss::SdofModel model(p);
  CHECK(p.natural_period() == doctest::Approx(2.0 * kPi * std::sqrt(6e4 / 2e7)));
  CHECK(p.natural_period() == doctest::Approx(0.344).epsilon(2e-3));
  CHECK(model.response_max(Vector::Zero(200)) == 0.0);
  CHECK(model.g(Vector::Zero(200)) == p.x);
  CHECK(model.times().size() == 1000);

  RandomStream rs(4, 0);
  const Vector u = rs.normal_vector(200);
  hmcss::SdofProblem abs_p = p;
  abs_p.peak = hmcss::PeakMode::absolute;
  const hmcss::SdofModel abs_model(abs_p);
  CHECK(std::abs(abs_model.response_max(2.0 * u) - 2.0 * abs_model.response_max(u)) <= 1e-12);
  CHECK(std::abs(model.response_max(2.0 * u) - 2.0 * model.response_max(u)) <= 1e-12);
  CHECK(abs_model.response_max(u) >= model.response_max(u));
  CHECK(hmcss::sdof_response_max(model, u) == model.response_max(u));

  const Vector exact = model.response(u);
  const Vector rk = rk4_sdof_response(p, u, 2.5e-4);
  CHECK((exact - rk).cwiseAbs().maxCoeff() <= 1e-6 * exact.cwiseAbs().maxCoeff());

  const auto problem = hmcss::make_sdof_problem(p);
  CHECK_FALSE(problem.g.has_gradient());
  CHECK(problem.standard_normal);
  CHECK_THROWS(problem.g(Vector::Zero(10)));
  hmcss::SdofProblem odd = p;
  odd.n = 201;
  CHECK_THROWS_AS(hmcss::SdofModel{odd}, hmcss::ConfigError);
}

TEST_CASE("banana density") {
  const hmcss::BananaProblem p;
  const Vector mode = p.mode();
  CHECK(mode[0] == 0.0);
  CHECK(mode[1] == doctest::Approx(0.661250).epsilon(1e-12));
  const auto at_mode = hmcss::banana_logpdf_grad(p, mode);
  CHECK(at_mode.in_support);
  CHECK(at_mode.gradient.norm() <= 1e-12);

  // Mode by grid search.
  double best = -hmcss::kInf;
  Vector arg;
  for (double x = -1.0; x <= 1.0; x += 0.001) {
    for (double y = 0.0; y <= 1.5; y += 0.001) {
      const double v = hmcss::banana_logpdf_grad(p, pair(x, y)).log_density;
      if (v > best) {
        best = v;
        arg = pair(x, y);
      }
    }
  }
  CHECK((arg - mode).norm() <= 2e-3);

  RandomStream rs(5, 0);
  for (int i = 0; i < 50; ++i) {
    const Vector xy = pair(3.0 * rs.normal(), 3.0 * rs.normal());
    const auto d = hmcss::banana_logpdf_grad(p, xy);
    const Vector fd = central_gradient(
        [&](const Vector& x) { return hmcss::banana_logpdf_grad(p, x).log_density; }, xy);
    CHECK(hmcss::testing::relative_error(d.gradient, fd) <= 1e-5);
  }
}

TEST_CASE("banana transform sampler matches the density") {
  // Self-normalized importance sampling under a wide Gaussian proposal
  // against plain averages of transformed draws.
  const hmcss::BananaProblem p;
  RandomStream rs(6, 0);
  const int n = 100000;
  const double s = 4.0;
  std::vector<double> w;
  std::vector<Vector> q;
  for (int i = 0; i < n; ++i) {
    const Vector xy = pair(s * rs.normal(), 1.0 + s * rs.normal());
    const double log_q = -0.5 * (xy[0] * xy[0] + (xy[1] - 1.0) * (xy[1] - 1.0)) / (s * s);
    w.push_back(std::exp(hmcss::banana_logpdf_grad(p, xy).log_density - log_q));
    q.push_back(xy);
  }
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  const std::function<double(const Vector&)> tests[] = {
      [](const Vector& v) { return v[0]; },
      [](const Vector& v) { return v[1]; },
      [](const Vector& v) { return v[0] * v[0]; },
      [](const Vector& v) { return std::sin(v[0]) + std::cos(v[1]); },
  };
  for (const auto& f : tests) {
    double is = 0.0;
    for (int i = 0; i < n; ++i) is += w[static_cast<std::size_t>(i)] * f(q[static_cast<std::size_t>(i)]);
    is /= wsum;
    double var_is = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = f(q[static_cast<std::size_t>(i)]) - is;
      var_is += std::pow(w[static_cast<std::size_t>(i)] / wsum, 2) * d * d;
    }
    std::vector<double> direct;
    for (int i = 0; i < n; ++i) direct.push_back(f(hmcss::banana_sample(p, rs)));
    const double se = std::sqrt(var_is + hmcss::testing::variance(direct) / n);
    CHECK(std::abs(is - hmcss::testing::mean(direct)) <= 3.0 * se);
  }
}

TEST_CASE("ellipse limit state") {
  hmcss::BananaProblem p;
  CHECK(hmcss::ellipse_g(p, pair(0, 0)) == doctest::Approx(36.0));
  const Vector on_axis = pair(p.r * p.c1 * std::cos(p.theta), p.r * p.c1 * std::sin(p.theta));
  CHECK(std::abs(hmcss::ellipse_g(p, on_axis)) <= 1e-12);
  hmcss::BananaProblem flipped = p;
  flipped.theta += kPi;
  RandomStream rs(7, 0);
  for (int i = 0; i < 100; ++i) {
    const Vector xy = pair(5.0 * rs.normal(), 5.0 * rs.normal());
    CHECK(hmcss::ellipse_g(flipped, xy) == doctest::Approx(hmcss::ellipse_g(p, xy)).epsilon(1e-12));
    Vector grad;
    hmcss::ellipse_g(p, xy, &grad);
    const Vector fd = central_gradient([&](const Vector& x) { return hmcss::ellipse_g(p, x); }, xy);
    CHECK(hmcss::testing::relative_error(grad, fd) <= 1e-6);
  }
  CHECK(*hmcss::banana_reference_pf(6.0) == 2.63e-2);
  CHECK_FALSE(hmcss::banana_reference_pf(7.0));

  const auto problem = hmcss::make_banana_ellipse_problem(p);
  const auto mc = hmcss::crude_monte_carlo(problem, 200000, RandomStream(8, 0));
  CHECK(std::abs(mc.pf - 2.63e-2) <= 3.0 * mc.std_error);
}

TEST_CASE("shear frame") {
  hmcss::ShearFrameProblem p;
  const double scale = hmcss::calibrate_force_scale(p);
  // max_i sum_{j >= i} F_j / k_i sits at the top story: 4.7 / 1.5.
  CHECK(scale == doctest::Approx(0.03 / (4.7 / 1.5)).epsilon(1e-12));
  p.force_scale = scale;
  const Vector d = hmcss::frame_drifts(p, p.stiffness_means);
  CHECK(d.maxCoeff() == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(d.maxCoeff() < p.u_y);
  CHECK(d.allFinite());

  const Vector stiff = p.stiffness_means * 1e9;
  CHECK(hmcss::frame_drifts(p, stiff).maxCoeff() < 1e-10);

  RandomStream rs(9, 0);
  const auto model = hmcss::frame_stiffness_model(p);
  for (int i = 0; i < 200; ++i) {
    const Vector k = model.sample(rs);
    Vector softer = k;
    const auto story = static_cast<Eigen::Index>(i % 3);
    softer[story] *= 0.5 + 0.5 * rs.uniform();
    const Vector a = hmcss::frame_drifts(p, k), b = hmcss::frame_drifts(p, softer);
    for (Eigen::Index s = 0; s < 3; ++s) CHECK(b[s] >= a[s]);
  }

  // Yielded story: demand above k u_y.
  Vector weak = p.stiffness_means;
  weak[2] = 0.5e8;
  CHECK(std::isinf(hmcss::frame_drifts(p, weak)[2]));

  hmcss::ShearFrameProblem uncalibrated;
  uncalibrated.force_scale = 1.0;
  CHECK(std::isinf(hmcss::frame_drifts(uncalibrated, uncalibrated.stiffness_means).maxCoeff()));

  const auto problem = hmcss::make_shear_frame_problem(hmcss::ShearFrameProblem{});
  CHECK(problem.g(p.stiffness_means) == doctest::Approx(0.12 - 0.03));
  CHECK(problem.g(weak) == -hmcss::kInf);
  CHECK(problem.mass.diag()[2] == doctest::Approx(1.0 / std::pow(1.5e7, 2)));
}

TEST_CASE("benchmark registry") {
  std::vector<std::string> ids;
  for (const auto& b : hmcss::benchmark_registry()) ids.push_back(b.id);
  CHECK(ids == std::vector<std::string>{"linear", "nonlinear", "sdof", "banana-ellipse",
                                        "shear-frame"});
  for (const auto& b : hmcss::benchmark_registry()) {
    CAPTURE(b.id);
    const auto problem = hmcss::make_benchmark(b.id, {});
    CHECK(problem.dim() > 0);
    CHECK(b.defaults.count(hmcss::benchmark_primary_param(b.id)) == 1);
  }
  CHECK(hmcss::make_benchmark("linear", {{"n", 10}}).dim() == 10);
  CHECK_THROWS_AS(hmcss::make_benchmark("pendulum", {}), hmcss::ConfigError);
  CHECK_THROWS_AS(hmcss::make_benchmark("linear", {{"kappa", 1}}), hmcss::ConfigError);
  CHECK(*hmcss::benchmark_reference_pf("linear", {{"beta0", 4}}) == hmcss::normal_tail(4));
  CHECK(*hmcss::benchmark_reference_pf("nonlinear", {{"kappa", 0.2}}) == 6.41e-5);
  CHECK(*hmcss::benchmark_reference_pf("banana-ellipse", {{"r", 10}}) == 1.90e-3);
  CHECK_FALSE(hmcss::benchmark_reference_pf("shear-frame", {}));
}
