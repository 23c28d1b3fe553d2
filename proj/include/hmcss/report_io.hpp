#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hmcss/experiment.hpp"

namespace hmcss {

enum class ReportFormat { csv, json_lines };

ReportFormat report_format_from_string(std::string_view name);

inline constexpr std::string_view kSummaryHeader =
    "benchmark,kernel,param,pf_mean,cov_emp,delta_f_mean,ng_mean,eff,reps,seed";
inline constexpr std::string_view kDetailHeader = "rep,pf_hat,delta_f_hat,ng,levels";

// 17 significant digits.
std::string format_double(double v);

std::string summary_csv(const std::vector<AggregateReport>& reports);
std::string detail_csv(const AggregateReport& report);
// One object per experiment, per-repetition rows nested under "rows".
std::string summary_json_lines(const std::vector<AggregateReport>& reports);

// Parsers for the formats above; per-repetition rows are attached only by
// the JSON-lines parser and parse_detail_csv.
std::vector<AggregateReport> parse_summary_csv(std::string_view text);
std::vector<RepetitionRow> parse_detail_csv(std::string_view text);
std::vector<AggregateReport> parse_summary_json_lines(std::string_view text);

// Path of the per-repetition file for experiment `index` next to `summary_path`.
std::string detail_path(const std::string& summary_path, std::size_t index);

// Writes the summary and, for CSV, one detail file per experiment.
// Throws std::runtime_error naming the path on I/O failure.
void emit_report(const std::vector<AggregateReport>& reports, const std::string& path,
                 ReportFormat format);

/// A parsed run file: one experiment per sweep value.
struct RunPlan {
  std::vector<ExperimentConfig> experiments;
  std::string output = "report.csv";
  ReportFormat format = ReportFormat::csv;
};

// JSON schema:
//   benchmark, params{}, sweep{param, values[]}, kernel,
//   subset{n, p0, max_levels, thinning_lag, initial},
//   sampler{t_f, alpha, dt, a_low, a_up, a_star, n_a, toll, max_iter, mh_width,
//           hit_solver, period_step_cap, adapt},
//   repetitions, seed, workers, output, format.
// Unknown keys are configuration errors.
RunPlan parse_run_plan(std::string_view json_text);

}  // namespace hmcss
