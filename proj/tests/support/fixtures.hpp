#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "hmcss/benchmarks.hpp"
#include "hmcss/subsim.hpp"
#include "stats.hpp"

namespace hmcss::testing {

// phi(u | 2 sqrt 2 - u1 - u2 <= 0)
inline Problem truncated_normal_fixture() {
  Problem p = make_linear_problem({2.0, 2});
  p.label = "truncated-normal";
  return p;
}

// banana(x, y | outside the ellipse of size r)
inline Problem banana_fixture(double r = 6.0) {
  BananaProblem b;
  b.r = r;
  return make_banana_ellipse_problem(b);
}

// Exact i.i.d. draws from the problem's target restricted to G <= 0, by rejection.
inline std::vector<Vector> rejection_oracle(const Problem& p, int n, RandomStream stream) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(n));
  while (static_cast<int>(out.size()) < n) {
    Vector x = p.sample(stream);
    if (p.g(x) <= 0.0) out.push_back(std::move(x));
  }
  return out;
}

struct StationarityResult {
  double min_p = 1.0;  // smallest per-marginal KS p-value over the checked lags
  bool all_inside = true;
  std::uint64_t g_evals = 0;
  std::uint64_t steps = 0;
};

// Starts n_chains independent chains at i.i.d. oracle draws, runs each up to
// the largest lag and compares the marginals at every lag in `lags` against a
// second, independent oracle set.
inline StationarityResult stationarity_check(const Problem& problem, KernelId kernel,
                                             const SamplerConfig& cfg,
                                             const std::vector<int>& lags, int n_chains,
                                             std::uint64_t seed) {
  const auto start = rejection_oracle(problem, n_chains, RandomStream(seed, 1));
  const auto reference = rejection_oracle(problem, n_chains, RandomStream(seed, 2));
  const int max_lag = *std::max_element(lags.begin(), lags.end());
  const auto dim = static_cast<Eigen::Index>(problem.dim());
  // states[lag index][chain]
  std::vector<std::vector<Vector>> at_lag(lags.size());
  StationarityResult res;
  const RandomStream chains(seed, 3);
  for (int c = 0; c < n_chains; ++c) {
    ChainState st{start[static_cast<std::size_t>(c)], problem.g(start[static_cast<std::size_t>(c)]),
                  Vector(), chains.substream(static_cast<std::uint64_t>(c))};
    for (int s = 1; s <= max_lag; ++s) {
      StepOutcome out = kernel_step(kernel, problem, std::move(st), 0.0, cfg);
      res.g_evals += static_cast<std::uint64_t>(out.g_evals);
      ++res.steps;
      st = std::move(out.state);
      if (!(problem.g(st.position) <= 0.0) || problem.g(st.position) != st.g_value) {
        res.all_inside = false;
      }
      for (std::size_t l = 0; l < lags.size(); ++l) {
        if (lags[l] == s) at_lag[l].push_back(st.position);
      }
    }
  }
  for (std::size_t l = 0; l < lags.size(); ++l) {
    for (Eigen::Index d = 0; d < dim; ++d) {
      std::vector<double> a, b;
      for (const auto& x : at_lag[l]) a.push_back(x[d]);
      for (const auto& x : reference) b.push_back(x[d]);
      res.min_p = std::min(res.min_p, ks_two_sample(a, b).p);
    }
  }
  return res;
}

}  // namespace hmcss::testing
