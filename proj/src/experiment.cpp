#include "hmcss/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

#include "hmcss/errors.hpp"

namespace hmcss {

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
  if (workers < 0) throw ConfigError("workers must be nonnegative");
  subset.validate();
  const Problem problem = make_benchmark(benchmark, params);
  check_kernel_capability(problem, kernel, sampler);
  if (subset.initial == InitialSampling::iid && !problem.sample) {
    throw ConfigError("benchmark '" + benchmark + "' has no i.i.d. sampler");
  }
}

AggregateReport aggregate(std::string benchmark, std::string kernel, double param,
                          std::uint64_t seed, std::vector<RepetitionRow> rows) {
  std::sort(rows.begin(), rows.end(),
            [](const RepetitionRow& a, const RepetitionRow& b) { return a.rep < b.rep; });
  AggregateReport out;
  out.benchmark = std::move(benchmark);
  out.kernel = std::move(kernel);
  out.param = param;
  out.seed = seed;
  out.reps = static_cast<int>(rows.size());
  if (rows.empty()) return out;
  const double r = static_cast<double>(rows.size());
  for (const auto& row : rows) {
    out.mean_pf += row.pf_hat / r;
    out.mean_delta_f += row.delta_f_hat / r;
    out.mean_ng += static_cast<double>(row.ng) / r;
    if (!row.converged) ++out.not_converged;
  }
  if (rows.size() > 1 && out.mean_pf > 0.0) {
    double ss = 0.0;
    for (const auto& row : rows) ss += (row.pf_hat - out.mean_pf) * (row.pf_hat - out.mean_pf);
    out.empirical_cov = std::sqrt(ss / (r - 1.0)) / out.mean_pf;
  }
  out.eff = out.empirical_cov * std::sqrt(out.mean_ng);
  out.rows = std::move(rows);
  return out;
}

AggregateReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const int reps = config.repetitions;
  std::vector<RepetitionRow> rows(static_cast<std::size_t>(reps));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const RandomStream master(config.seed, 0);

  auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= reps) return;
      try {
        Problem problem = make_benchmark(config.benchmark, config.params);
        auto counter = std::make_shared<std::atomic<std::uint64_t>>(0);
        problem.g = with_evaluation_counter(problem.g, counter);
        const RunReport rep = run_subset_simulation(problem, config.kernel, config.subset,
                                                    config.sampler,
                                                    master.substream(static_cast<std::uint64_t>(r)));
        RepetitionRow& row = rows[static_cast<std::size_t>(r)];
        row.rep = r;
        row.pf_hat = rep.pf_hat;
        row.delta_f_hat = rep.delta_f_hat;
        row.ng = rep.ng;
        row.levels = static_cast<int>(rep.levels.size());
        row.converged = rep.converged;
        row.counted_ng = counter->load();
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(reps);
        return;
      }
    }
  };

  unsigned n_workers = config.workers > 0 ? static_cast<unsigned>(config.workers)
                                          : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(reps));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  double param = 0.0;
  const std::string primary = benchmark_primary_param(config.benchmark);
  if (auto it = config.params.find(primary); it != config.params.end()) {
    param = it->second;
  } else {
    for (const auto& info : benchmark_registry()) {
      if (info.id == config.benchmark) param = info.defaults.at(primary);
    }
  }
  return aggregate(config.benchmark, std::string(to_string(config.kernel)), param, config.seed,
                   std::move(rows));
}

}  // namespace hmcss
