#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hmcss/samplers.hpp"
#include "hmcss/subsim.hpp"

namespace hmcss {

struct DemoOptions {
  int steps = 500;
  std::uint64_t seed = 1;
  std::optional<Vector> start;             // default depends on the target
  std::optional<Vector> initial_momentum;  // used as p* before the first step
  SamplerConfig sampler;
};

struct DemoRow {
  int step = 0;
  double q1 = 0.0;
  double q2 = 0.0;
  bool accepted = false;
};

// Targets: std-normal, truncated-normal (2 sqrt 2 - u1 - u2 <= 0), banana.
// Throws ConfigError for unknown ids, kernel mismatches, or a start outside
// the domain.
std::vector<DemoRow> demo_trajectories(const std::string& target, KernelId kernel,
                                       const DemoOptions& options);

std::vector<std::string> demo_targets();

// Header "step,q1,q2,accepted" and one row per step.
std::string demo_csv(const std::vector<DemoRow>& rows);

}  // namespace hmcss
