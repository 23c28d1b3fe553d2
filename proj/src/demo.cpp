#include "hmcss/demo.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "hmcss/benchmarks.hpp"
#include "hmcss/errors.hpp"
#include "hmcss/report_io.hpp"

namespace hmcss {

std::vector<std::string> demo_targets() { return {"std-normal", "truncated-normal", "banana"}; }

namespace {

// The demo problem and the conditioning threshold it is sampled under.
std::pair<Problem, double> demo_problem(const std::string& target) {
  if (target == "std-normal" || target == "truncated-normal") {
    const bool truncated = target == "truncated-normal";
    LinearProblem lp{2.0, 2};
    Problem pr = make_linear_problem(lp);
    pr.label = target;
    return {std::move(pr), truncated ? 0.0 : kInf};
  }
  if (target == "banana") {
    BananaProblem bp;
    Problem pr = make_banana_ellipse_problem(bp);
    pr.label = target;
    return {std::move(pr), kInf};
  }
  throw ConfigError("unknown demo target '" + target + "'");
}

}  // namespace

std::vector<DemoRow> demo_trajectories(const std::string& target, KernelId kernel,
                                       const DemoOptions& options) {
  if (options.steps < 0) throw ConfigError("steps must be nonnegative");
  auto [problem, threshold] = demo_problem(target);
  if (problem.dim() != 2) throw ConfigError("demo targets must be two-dimensional");
  check_kernel_capability(problem, kernel, options.sampler);

  Vector start;
  if (options.start) {
    start = *options.start;
  } else if (target == "truncated-normal") {
    start = Vector::Constant(2, 2.0);
  } else if (target == "banana") {
    start = (Vector(2) << 4.0, 5.0).finished();
  } else {
    start = Vector::Constant(2, 10.0);
  }
  if (start.size() != 2) throw ConfigError("start point must have two coordinates");
  const double g0 = problem.g(start);
  if (!(g0 <= threshold)) throw ConfigError("start point lies outside the sampling domain");

  ChainState chain{start, g0, Vector(), RandomStream(options.seed, 0)};
  if (options.initial_momentum) {
    if (options.initial_momentum->size() != 2) {
      throw ConfigError("initial momentum must have two coordinates");
    }
    chain.last_momentum = *options.initial_momentum;
  }
  std::vector<DemoRow> rows;
  rows.reserve(static_cast<std::size_t>(options.steps));
  for (int s = 1; s <= options.steps; ++s) {
    StepOutcome out = kernel_step(kernel, problem, std::move(chain), threshold, options.sampler);
    chain = std::move(out.state);
    rows.push_back({s, chain.position[0], chain.position[1], out.accepted});
  }
  return rows;
}

std::string demo_csv(const std::vector<DemoRow>& rows) {
  std::ostringstream os;
  os << "step,q1,q2,accepted\n";
  for (const auto& r : rows) {
    os << r.step << ',' << format_double(r.q1) << ',' << format_double(r.q2) << ','
       << (r.accepted ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace hmcss
