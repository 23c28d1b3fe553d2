// hmcss: run Subset Simulation experiments, emit demo trajectories, list benchmarks.
//
// Exit status: 0 success, 2 configuration error, 3 estimation failure, 4 I/O error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hmcss/benchmarks.hpp"
#include "hmcss/demo.hpp"
#include "hmcss/errors.hpp"
#include "hmcss/experiment.hpp"
#include "hmcss/report_io.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitEstimation = 3;
constexpr int kExitIo = 4;

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw hmcss::ConfigError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// HMCSS_OUTPUT_DIR relocates relative output paths.
std::string resolve_output(const std::string& path) {
  const char* dir = std::getenv("HMCSS_OUTPUT_DIR");
  if (!dir || !*dir || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(dir) / path).string();
}

hmcss::Vector pair_vector(const std::vector<double>& v, const char* what) {
  if (v.size() != 2) throw hmcss::ConfigError(std::string(what) + " needs two values");
  return (hmcss::Vector(2) << v[0], v[1]).finished();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subset Simulation with Hamiltonian Monte Carlo kernels"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run the experiments described by a JSON config");
  std::string config_path;
  std::optional<int> reps_override, workers_override;
  std::optional<std::uint64_t> seed_override;
  std::string output_override, format_override, kernel_override;
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("--reps", reps_override, "override repetitions");
  run->add_option("--seed", seed_override, "override master seed");
  run->add_option("--workers", workers_override, "override worker threads");
  run->add_option("--output", output_override, "override output path");
  run->add_option("--format", format_override, "csv or json-lines");
  run->add_option("--kernel", kernel_override, "override kernel id");

  auto* demo = app.add_subcommand("demo", "emit a raw chain trajectory on a 2-D target");
  std::string demo_target, demo_kernel, demo_output, demo_solver = "secant";
  hmcss::DemoOptions demo_opts;
  std::vector<double> demo_start, demo_momentum;
  demo->add_option("target", demo_target, "std-normal, truncated-normal or banana")->required();
  demo->add_option("kernel", demo_kernel, "rs_g, bb_g, rs_l, bb_l, cwmh or block_mh")->required();
  demo->add_option("--steps", demo_opts.steps, "number of kernel steps");
  demo->add_option("--seed", demo_opts.seed, "random seed");
  demo->add_option("--start", demo_start, "start point q1 q2")->expected(2);
  demo->add_option("--momentum", demo_momentum, "initial p* (p1 p2)")->expected(2);
  demo->add_option("--tf", demo_opts.sampler.t_f, "trajectory duration");
  demo->add_option("--alpha", demo_opts.sampler.alpha, "partial refreshment");
  demo->add_option("--dt", demo_opts.sampler.dt, "leapfrog step");
  demo->add_option("--mh-width", demo_opts.sampler.mh_width, "MH proposal width");
  demo->add_option("--hit-solver", demo_solver, "secant, newton or analytic");
  demo->add_option("--output", demo_output, "output CSV (stdout when empty)");

  auto* list = app.add_subcommand("bench-list", "list registered benchmarks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*list) {
      for (const auto& info : hmcss::benchmark_registry()) {
        std::cout << info.id << "  " << info.description << '\n';
        for (const auto& [name, value] : info.defaults) {
          std::cout << "    " << name << " = " << hmcss::format_double(value) << '\n';
        }
      }
      return 0;
    }
    if (*demo) {
      if (!demo_start.empty()) demo_opts.start = pair_vector(demo_start, "--start");
      if (!demo_momentum.empty()) {
        demo_opts.initial_momentum = pair_vector(demo_momentum, "--momentum");
      }
      demo_opts.sampler.hit_solver = hmcss::hit_solver_from_string(demo_solver);
      const auto rows = hmcss::demo_trajectories(
          demo_target, hmcss::kernel_from_string(demo_kernel), demo_opts);
      const std::string csv = hmcss::demo_csv(rows);
      if (demo_output.empty()) {
        std::cout << csv;
      } else {
        const std::string path = resolve_output(demo_output);
        std::ofstream os(path, std::ios::binary);
        if (!(os << csv)) throw std::ios_base::failure("cannot write '" + path + "'");
      }
      return 0;
    }

    hmcss::RunPlan plan = hmcss::parse_run_plan(read_text(config_path));
    if (!output_override.empty()) plan.output = output_override;
    if (!format_override.empty()) plan.format = hmcss::report_format_from_string(format_override);
    for (auto& exp : plan.experiments) {
      if (reps_override) exp.repetitions = *reps_override;
      if (seed_override) exp.seed = *seed_override;
      if (workers_override) exp.workers = *workers_override;
      if (!kernel_override.empty()) exp.kernel = hmcss::kernel_from_string(kernel_override);
    }
    for (const auto& exp : plan.experiments) exp.validate();
    std::vector<hmcss::AggregateReport> reports;
    for (const auto& exp : plan.experiments) {
      reports.push_back(hmcss::run_experiment(exp));
      const auto& r = reports.back();
      std::cerr << r.benchmark << ' ' << r.kernel << " param=" << r.param
                << " pf=" << r.mean_pf << " cov=" << r.empirical_cov << " NG=" << r.mean_ng
                << '\n';
    }
    hmcss::emit_report(reports, resolve_output(plan.output), plan.format);
    return 0;
  } catch (const hmcss::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const hmcss::CapabilityError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const hmcss::EstimationError& e) {
    std::cerr << "estimation failure: " << e.what() << '\n';
    return kExitEstimation;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitEstimation;
  }
}
