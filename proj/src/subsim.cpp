#include "hmcss/subsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hmcss/errors.hpp"

namespace hmcss {

std::string_view to_string(KernelId k) {
  switch (k) {
    case KernelId::rs_g:
      return "rs_g";
    case KernelId::bb_g:
      return "bb_g";
    case KernelId::rs_l:
      return "rs_l";
    case KernelId::bb_l:
      return "bb_l";
    case KernelId::cwmh:
      return "cwmh";
    case KernelId::block_mh:
      return "block_mh";
  }
  return "?";
}

KernelId kernel_from_string(std::string_view name) {
  for (KernelId k : {KernelId::rs_g, KernelId::bb_g, KernelId::rs_l, KernelId::bb_l,
                     KernelId::cwmh, KernelId::block_mh}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown kernel '" + std::string(name) +
                    "' (expected rs_g, bb_g, rs_l, bb_l, cwmh or block_mh)");
}

void SubsetConfig::validate() const {
  if (n < 1) throw ConfigError("N must be positive");
  if (!(p0 > 0.0 && p0 < 1.0)) throw ConfigError("p0 must lie in (0, 1)");
  const double np0 = n * p0;
  if (std::abs(np0 - std::round(np0)) > 1e-9 || std::round(np0) < 1.0) {
    throw ConfigError("N p0 must be a positive integer");
  }
  const double inv = 1.0 / p0;
  if (std::abs(inv - std::round(inv)) > 1e-9) throw ConfigError("1/p0 must be an integer");
  if (max_levels < 1) throw ConfigError("max_levels must be positive");
  if (thinning_lag < 0) throw ConfigError("thinning lag must be nonnegative");
}

int SubsetConfig::seeds() const { return static_cast<int>(std::lround(n * p0)); }
int SubsetConfig::chain_length() const { return static_cast<int>(std::lround(1.0 / p0)); }

ThresholdSelection select_threshold(const std::vector<double>& g_values, double p0) {
  const std::size_t n = g_values.size();
  const auto m = static_cast<std::size_t>(std::lround(n * p0));
  if (m < 1) throw std::invalid_argument("select_threshold: N p0 must be at least 1");
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isnan(g_values[i])) order.push_back(i);
  }
  if (order.size() < m) {
    throw EstimationError("level failure: only " + std::to_string(order.size()) +
                          " usable limit-state values, need " + std::to_string(m));
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return g_values[a] < g_values[b]; });
  ThresholdSelection out;
  out.threshold = g_values[order[m - 1]];
  if (out.threshold <= 0.0) {
    out.threshold = 0.0;
    out.final_level = true;
  }
  out.seeds.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
  std::sort(out.seeds.begin(), out.seeds.end());
  out.below = static_cast<std::size_t>(std::count_if(
      g_values.begin(), g_values.end(), [&](double g) { return g <= out.threshold; }));
  return out;
}

double correlation_factor(const std::vector<std::vector<bool>>& chains) {
  if (chains.empty()) return 0.0;
  const std::size_t nc = chains.size();
  const std::size_t ns = chains.front().size();
  std::size_t total = 0, hits = 0;
  for (const auto& c : chains) {
    if (c.size() != ns) throw std::invalid_argument("correlation_factor: unequal chain lengths");
    total += c.size();
    hits += static_cast<std::size_t>(std::count(c.begin(), c.end(), true));
  }
  const double p = static_cast<double>(hits) / static_cast<double>(total);
  const double var = p * (1.0 - p);
  if (var <= 0.0) return 0.0;
  double gamma = 0.0;
  for (std::size_t k = 1; k < ns; ++k) {
    double sum = 0.0;
    for (const auto& c : chains) {
      for (std::size_t i = 0; i + k < ns; ++i) sum += (c[i] && c[i + k]) ? 1.0 : 0.0;
    }
    const double r = sum / static_cast<double>(total - k * nc) - p * p;
    gamma += 2.0 * (1.0 - static_cast<double>(k) / static_cast<double>(ns)) * (r / var);
  }
  return gamma;
}

double level_cov(double p_j, int n, double gamma) {
  if (p_j <= 0.0 || p_j >= 1.0) return 0.0;
  return std::sqrt((1.0 - p_j) / (n * p_j) * (1.0 + gamma));
}

double combine_cov(const std::vector<SubsetLevelRecord>& levels) {
  double s = 0.0;
  for (const auto& l : levels) s += l.delta * l.delta;
  return std::sqrt(s);
}

std::vector<Vector> thin_initial_chain(const std::vector<Vector>& chain, int k, int n) {
  const std::size_t lag = k <= 0 ? 1 : static_cast<std::size_t>(k);
  const std::size_t need = lag * static_cast<std::size_t>(n - 1) + 1;
  if (chain.size() < need) {
    throw std::invalid_argument("thin_initial_chain: chain of length " +
                                std::to_string(chain.size()) + " too short, need " +
                                std::to_string(need));
  }
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::size_t i = 0; out.size() < static_cast<std::size_t>(n); i += lag) {
    out.push_back(chain[i]);
  }
  return out;
}

double eff_metric(double cov, double ng) {
  if (!(ng > 0.0)) throw std::invalid_argument("eff_metric: NG must be positive");
  return cov * std::sqrt(ng);
}

namespace {

bool is_gaussian_kernel(KernelId k) { return k == KernelId::rs_g || k == KernelId::bb_g; }
bool is_hmc_generic(KernelId k) { return k == KernelId::rs_l || k == KernelId::bb_l; }

StepOutcome step_with(KernelId kernel, const Problem& problem, const HamiltonianSystem& sys,
                      ChainState chain, double threshold, const SamplerConfig& kcfg) {
  switch (kernel) {
    case KernelId::rs_g:
      return rs_hmc_step_gaussian(std::move(chain), problem.g, threshold, kcfg);
    case KernelId::bb_g:
      return bb_hmc_step_gaussian(std::move(chain), problem.g, threshold, kcfg, kcfg.hit_solver);
    case KernelId::rs_l:
      return rs_hmc_step_generic(std::move(chain), sys, problem.g, threshold, kcfg);
    case KernelId::bb_l:
      return bb_hmc_step_generic(std::move(chain), sys, problem.g, threshold, kcfg,
                                 kcfg.hit_solver);
    case KernelId::cwmh:
      if (problem.standard_normal) {
        return cwmh_step_gaussian(std::move(chain), problem.g, threshold, kcfg);
      }
      return cwmh_step(std::move(chain), problem.target, problem.g, threshold, kcfg);
    case KernelId::block_mh:
      return block_mh_step(std::move(chain), problem.target, problem.g, threshold, kcfg);
  }
  throw std::logic_error("unreachable kernel id");
}

}  // namespace

void check_kernel_capability(const Problem& problem, KernelId kernel, const SamplerConfig& kcfg) {
  const std::string name(to_string(kernel));
  if (is_gaussian_kernel(kernel) && !problem.standard_normal) {
    throw ConfigError("kernel " + name + " needs a standard-normal problem, '" + problem.label +
                      "' is not");
  }
  if (is_hmc_generic(kernel) && !problem.target.has_gradient()) {
    throw ConfigError("kernel " + name + " needs a target gradient");
  }
  if (kernel == KernelId::bb_g || kernel == KernelId::bb_l) {
    if (kcfg.hit_solver == HitSolver::newton && !problem.g.has_gradient()) {
      throw ConfigError("Newton hitting time needs a limit-state gradient for '" + problem.label +
                        "'");
    }
    if (kcfg.hit_solver == HitSolver::analytic) {
      if (kernel == KernelId::bb_l) {
        throw ConfigError("analytic hitting time applies only to bb_g");
      }
      if (!problem.g.has_analytic_crossing()) {
        throw ConfigError("'" + problem.label + "' has no closed-form hitting time");
      }
    }
  }
  kcfg.validate(is_gaussian_kernel(kernel));
}

StepOutcome kernel_step(KernelId kernel, const Problem& problem, ChainState chain,
                        double threshold, const SamplerConfig& kcfg) {
  const HamiltonianSystem sys{problem.target, problem.mass};
  return step_with(kernel, problem, sys, std::move(chain), threshold, kcfg);
}

std::vector<Vector> hmc_chain(const HamiltonianSystem& sys, const Vector& start, int length,
                              double t_f, double dt, RandomStream& stream) {
  std::vector<Vector> out;
  if (length <= 0) return out;
  out.reserve(static_cast<std::size_t>(length));
  out.push_back(start);
  LeapfrogIntegrator lf(sys, dt);
  const int steps = leapfrog_steps(t_f, dt);
  Vector q = start;
  double v0 = potential(sys, q);
  if (!std::isfinite(v0)) throw std::invalid_argument("hmc_chain: start outside the support");
  while (static_cast<int>(out.size()) < length) {
    const Vector p0 = sys.mass.sample_momentum(stream);
    lf.reset({q, p0});
    bool ok = true;
    for (int i = 0; i < steps && ok; ++i) ok = lf.step();
    const double u = stream.uniform();
    if (ok) {
      const double h0 = v0 + sys.mass.kinetic(p0);
      const double h1 = lf.potential() + sys.mass.kinetic(lf.state().p);
      if (u < std::exp(h0 - h1)) {
        q = lf.state().q;
        v0 = lf.potential();
      }
    }
    out.push_back(q);
  }
  return out;
}

namespace {

constexpr std::uint64_t kPeriodStreamBase = 1u << 20;

// Mean period of the Hamiltonian system from positions paired with fresh momenta.
double mean_period_of(const HamiltonianSystem& sys, const std::vector<Vector>& positions,
                      const SamplerConfig& kcfg, RandomStream stream) {
  std::vector<PhaseState> states;
  states.reserve(positions.size());
  for (const Vector& q : positions) states.push_back({q, sys.mass.sample_momentum(stream)});
  return estimate_mean_period(sys, states, kcfg.dt, kcfg.period_step_cap).mean;
}

std::vector<Vector> level0_samples(const Problem& problem, KernelId kernel,
                                   const SubsetConfig& scfg, const SamplerConfig& kcfg,
                                   const HamiltonianSystem& sys, RandomStream& stream) {
  std::vector<Vector> samples;
  if (scfg.initial == InitialSampling::iid) {
    if (!problem.sample) {
      throw ConfigError("'" + problem.label + "' has no i.i.d. sampler; use MCMC initialization");
    }
    samples.reserve(static_cast<std::size_t>(scfg.n));
    for (int i = 0; i < scfg.n; ++i) samples.push_back(problem.sample(stream));
    return samples;
  }
  if (!problem.chain_start) throw ConfigError("'" + problem.label + "' has no chain start");
  if (!problem.target.has_gradient()) {
    throw ConfigError("MCMC initialization needs a target gradient");
  }
  (void)kernel;
  const int batch = static_cast<int>(std::lround(kcfg.n_a / scfg.p0));
  const std::vector<Vector> starts(static_cast<std::size_t>(batch), *problem.chain_start);
  const double t0 = mean_period_of(sys, starts, kcfg, stream.substream(kPeriodStreamBase));
  const int lag = std::max(scfg.thinning_lag, 1);
  const int length = lag * (scfg.n - 1) + 1;
  const std::vector<Vector> chain =
      hmc_chain(sys, *problem.chain_start, length, t0 / 8.0, kcfg.dt, stream);
  return thin_initial_chain(chain, lag, scfg.n);
}

}  // namespace

RunReport run_subset_simulation(const Problem& problem, KernelId kernel, const SubsetConfig& scfg,
                                const SamplerConfig& kcfg, RandomStream stream) {
  scfg.validate();
  check_kernel_capability(problem, kernel, kcfg);
  const HamiltonianSystem sys{problem.target, problem.mass};
  const int n_seeds = scfg.seeds();
  const int ns = scfg.chain_length();
  const bool gaussian = is_gaussian_kernel(kernel);
  const bool generic = is_hmc_generic(kernel);
  const AdaptMode mode =
      (kernel == KernelId::bb_g || kernel == KernelId::bb_l) ? AdaptMode::bb : AdaptMode::rs;

  RandomStream init_stream = stream.substream(0);
  std::vector<Vector> samples = level0_samples(problem, kernel, scfg, kcfg, sys, init_stream);
  std::vector<double> g_values(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) g_values[i] = problem.g(samples[i]);

  RunReport report;
  report.ng = static_cast<std::uint64_t>(scfg.n);

  double t_f = kcfg.t_f;
  if (generic && kcfg.adapt) {
    const auto m = std::min(samples.size(), static_cast<std::size_t>(kcfg.n_a * ns));
    const std::vector<Vector> head(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(m));
    t_f = mean_period_of(sys, head, kcfg, stream.substream(kPeriodStreamBase)) / 8.0;
  }

  SubsetLevelRecord current;
  current.level = 0;
  current.g_evals = static_cast<std::uint64_t>(scfg.n);
  current.acceptance_rate = 0.0;
  current.t_f_used = 0.0;
  std::vector<std::vector<Vector>> chain_samples;  // chain structure of the current level

  for (int level = 0;; ++level) {
    const ThresholdSelection sel = select_threshold(g_values, scfg.p0);
    current.threshold = sel.threshold;
    current.p_j = static_cast<double>(sel.below) / static_cast<double>(scfg.n);
    if (level > 0) {
      std::vector<std::vector<bool>> indicators;
      indicators.reserve(static_cast<std::size_t>(n_seeds));
      for (int c = 0; c < n_seeds; ++c) {
        std::vector<bool> row(static_cast<std::size_t>(ns));
        for (int i = 0; i < ns; ++i) row[i] = g_values[c * ns + i] <= sel.threshold;
        indicators.push_back(std::move(row));
      }
      current.gamma = correlation_factor(indicators);
    }
    current.delta = level_cov(current.p_j, scfg.n, current.gamma);
    current.degenerate = current.p_j <= 0.0 || current.p_j >= 1.0;
    report.levels.push_back(current);

    if (sel.final_level) {
      report.final_failures = sel.below;
      break;
    }
    if (level + 1 >= scfg.max_levels) {
      report.converged = false;
      break;
    }

    // Conditional sampling at threshold b_j from the seeds.
    const double b = sel.threshold;
    RandomStream level_stream = stream.substream(static_cast<std::uint64_t>(level) + 1);
    std::vector<Vector> next_samples;
    std::vector<double> next_g;
    next_samples.reserve(static_cast<std::size_t>(scfg.n));
    next_g.reserve(static_cast<std::size_t>(scfg.n));
    SubsetLevelRecord next;
    next.level = level + 1;
    next.t_f_used = t_f;
    int accepted_total = 0;
    int accepted_batch = 0;
    int chains_in_batch = 0;
    int batch_index = 0;
    std::size_t batch_begin = 0;
    SamplerConfig cfg = kcfg;
    for (int c = 0; c < n_seeds; ++c) {
      const std::size_t seed_idx = sel.seeds[static_cast<std::size_t>(c)];
      ChainState chain{samples[seed_idx], g_values[seed_idx], Vector(),
                       level_stream.substream(static_cast<std::uint64_t>(c))};
      next_samples.push_back(chain.position);
      next_g.push_back(chain.g_value);
      cfg.t_f = t_f;
      for (int s = 1; s < ns; ++s) {
        StepOutcome out = step_with(kernel, problem, sys, std::move(chain), b, cfg);
        next.g_evals += static_cast<std::uint64_t>(out.g_evals);
        if (out.accepted) ++accepted_batch;
        if (out.diverged) ++report.diverged_steps;
        chain = std::move(out.state);
        next_samples.push_back(chain.position);
        next_g.push_back(chain.g_value);
      }
      ++chains_in_batch;
      if (chains_in_batch == kcfg.n_a) {
        accepted_total += accepted_batch;
        if (kcfg.adapt && (gaussian || generic)) {
          const double a = static_cast<double>(accepted_batch) / (kcfg.n_a * (ns - 1));
          double period = 2.0 * std::numbers::pi;
          if (generic) {
            const std::vector<Vector> batch(
                next_samples.begin() + static_cast<std::ptrdiff_t>(batch_begin),
                next_samples.end());
            period = mean_period_of(
                sys, batch, kcfg,
                level_stream.substream(kPeriodStreamBase + static_cast<std::uint64_t>(batch_index)));
          }
          t_f = adapt_tf(t_f, a, period, kcfg, mode);
        }
        accepted_batch = 0;
        chains_in_batch = 0;
        batch_begin = next_samples.size();
        ++batch_index;
      }
    }
    accepted_total += accepted_batch;
    next.acceptance_rate =
        static_cast<double>(accepted_total) / (static_cast<double>(n_seeds) * (ns - 1));
    report.ng += next.g_evals;
    samples = std::move(next_samples);
    g_values = std::move(next_g);
    current = next;
  }

  double pf = 1.0;
  for (std::size_t j = 0; j + 1 < report.levels.size(); ++j) pf *= scfg.p0;
  pf *= report.levels.back().p_j;
  if (!report.converged) pf = std::pow(scfg.p0, static_cast<double>(report.levels.size()));
  report.pf_hat = pf;
  report.delta_f_hat = combine_cov(report.levels);
  report.eff = eff_metric(report.delta_f_hat, static_cast<double>(report.ng));
  return report;
}

CrudeMonteCarlo crude_monte_carlo(const Problem& problem, std::uint64_t samples,
                                  RandomStream stream) {
  if (!problem.sample) throw ConfigError("'" + problem.label + "' has no i.i.d. sampler");
  if (samples == 0) throw std::invalid_argument("crude Monte Carlo needs at least one sample");
  CrudeMonteCarlo out;
  out.samples = samples;
  for (std::uint64_t i = 0; i < samples; ++i) {
    if (problem.g(problem.sample(stream)) <= 0.0) ++out.failures;
  }
  out.pf = static_cast<double>(out.failures) / static_cast<double>(samples);
  out.std_error = std::sqrt(out.pf * (1.0 - out.pf) / static_cast<double>(samples));
  return out;
}

}  // namespace hmcss
