#include <algorithm>
#include <cmath>
#include <numbers>

#include "hmcss/samplers.hpp"

namespace hmcss {
namespace {

// Sign-change bracket: G(inside) <= 0 < G(outside).
struct Bracket {
  double inside;
  double outside;

  void update(double t, double g) { (g > 0.0 ? outside : inside) = t; }
  bool contains(double t) const {
    return t > std::min(inside, outside) && t < std::max(inside, outside);
  }
};

// Damped update t_next = t - lambda * step, halving lambda until t_next lies
// strictly inside the bracket; bisection when no damping qualifies.
double damped_update(double t, double step, const Bracket& br) {
  double lambda = 1.0;
  if (std::isfinite(step)) {
    for (int k = 0; k < 64; ++k) {
      const double t_next = t - lambda * step;
      if (br.contains(t_next)) return t_next;
      lambda *= 0.5;
    }
  }
  return 0.5 * (br.inside + br.outside);
}

}  // namespace

HitTime secant_hit_time(const std::function<double(double)>& g_of_t, double t0, double t1,
                        double g0, double g1, const SamplerConfig& cfg) {
  HitTime out;
  out.t_h = t1;
  out.t_prev = t0;
  if (g1 <= cfg.toll) {
    out.converged = true;
    return out;
  }
  Bracket br{t0, t1};
  double t_prev = t0, g_prev = g0;
  double t_cur = t1, g_cur = g1;
  while (std::abs(g_cur) > cfg.toll) {
    if (out.iterations >= cfg.max_iter) return out;
    const double denom = g_cur - g_prev;
    const double step = denom == 0.0 ? NAN : g_cur * (t_cur - t_prev) / denom;
    const double t_next = damped_update(t_cur, step, br);
    const double g_next = g_of_t(t_next);
    ++out.g_evals;
    ++out.iterations;
    if (std::isnan(g_next)) return out;
    br.update(t_next, g_next);
    t_prev = t_cur;
    g_prev = g_cur;
    t_cur = t_next;
    g_cur = g_next;
  }
  out.t_h = t_cur;
  out.t_prev = t_prev;
  out.converged = true;
  return out;
}

HitTime newton_hit_time(const std::function<NewtonPoint(double)>& eval, double t0, double t1,
                        double g0, double g1, const SamplerConfig& cfg) {
  HitTime out;
  out.t_h = t1;
  out.t_prev = t0;
  if (g1 <= cfg.toll) {
    out.converged = true;
    return out;
  }
  // Regula-falsi seed from the two known endpoints.
  const double t2 = (t0 * g1 - t1 * g0) / (g1 - g0);
  Bracket br{t0, t1};
  NewtonPoint cur = eval(t2);
  double t_cur = t2;
  double t_prev = t1, g_prev = g1;
  ++out.g_evals;
  ++out.iterations;
  if (std::isnan(cur.g)) return out;
  br.update(t2, cur.g);
  while (std::abs(cur.g) > cfg.toll) {
    if (out.iterations >= cfg.max_iter) return out;
    double step;
    if (std::abs(cur.dgdt) < 1e-14) {
      const double denom = cur.g - g_prev;
      step = denom == 0.0 ? NAN : cur.g * (t_cur - t_prev) / denom;
    } else {
      step = cur.g / cur.dgdt;
    }
    const double t_next = damped_update(t_cur, step, br);
    NewtonPoint next = eval(t_next);
    ++out.g_evals;
    ++out.iterations;
    if (std::isnan(next.g)) return out;
    br.update(t_next, next.g);
    t_prev = t_cur;
    g_prev = cur.g;
    t_cur = t_next;
    cur = std::move(next);
  }
  out.t_h = t_cur;
  out.t_prev = t_prev;
  out.gradient = std::move(cur.gradient);
  out.converged = true;
  return out;
}

std::optional<double> analytic_hit_time_linear(double beta0, const Vector& u, const Vector& p,
                                               double t_f) {
  // Along the flow s(t) = sum(u(t))/sqrt(n) = A sin t + B cos t = R cos(t - phi);
  // the surface is s(t) = beta0.
  const double scale = 1.0 / std::sqrt(static_cast<double>(u.size()));
  const double a = p.sum() * scale;
  const double b = u.sum() * scale;
  const double r = std::hypot(a, b);
  if (r == 0.0 || std::abs(beta0) > r) return std::nullopt;
  const double phi = std::atan2(a, b);
  const double delta = std::acos(std::clamp(beta0 / r, -1.0, 1.0));
  constexpr double two_pi = 2.0 * std::numbers::pi;
  constexpr double eps = 1e-12;
  std::optional<double> best;
  for (const double base : {phi - delta, phi + delta}) {
    // Smallest representative strictly above zero.
    double t = std::fmod(base, two_pi);
    if (t <= eps) t += two_pi;
    if (t <= eps) t += two_pi;
    if (t <= t_f && (!best || t < *best)) best = t;
  }
  return best;
}

}  // namespace hmcss
