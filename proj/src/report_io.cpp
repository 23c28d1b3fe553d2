#include "hmcss/report_io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hmcss/errors.hpp"

namespace hmcss {

using nlohmann::json;

ReportFormat report_format_from_string(std::string_view name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json-lines" || name == "jsonl") return ReportFormat::json_lines;
  throw ConfigError("unknown report format '" + std::string(name) + "' (csv or json-lines)");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string summary_csv(const std::vector<AggregateReport>& reports) {
  std::ostringstream os;
  os << kSummaryHeader << '\n';
  for (const auto& r : reports) {
    os << r.benchmark << ',' << r.kernel << ',' << format_double(r.param) << ','
       << format_double(r.mean_pf) << ',' << format_double(r.empirical_cov) << ','
       << format_double(r.mean_delta_f) << ',' << format_double(r.mean_ng) << ','
       << format_double(r.eff) << ',' << r.reps << ',' << r.seed << '\n';
  }
  return os.str();
}

std::string detail_csv(const AggregateReport& report) {
  std::ostringstream os;
  os << kDetailHeader << '\n';
  for (const auto& row : report.rows) {
    os << row.rep << ',' << format_double(row.pf_hat) << ',' << format_double(row.delta_f_hat)
       << ',' << row.ng << ',' << row.levels << '\n';
  }
  return os.str();
}

std::string summary_json_lines(const std::vector<AggregateReport>& reports) {
  std::ostringstream os;
  for (const auto& r : reports) {
    json rows = json::array();
    for (const auto& row : r.rows) {
      rows.push_back({{"rep", row.rep},
                      {"pf_hat", row.pf_hat},
                      {"delta_f_hat", row.delta_f_hat},
                      {"ng", row.ng},
                      {"levels", row.levels}});
    }
    const json j = {{"benchmark", r.benchmark}, {"kernel", r.kernel},
                    {"param", r.param},         {"pf_mean", r.mean_pf},
                    {"cov_emp", r.empirical_cov}, {"delta_f_mean", r.mean_delta_f},
                    {"ng_mean", r.mean_ng},     {"eff", r.eff},
                    {"reps", r.reps},           {"seed", r.seed},
                    {"rows", rows}};
    os << j.dump() << '\n';
  }
  return os.str();
}

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    std::string_view line = text.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad integer '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<AggregateReport> parse_summary_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != kSummaryHeader) {
    throw std::invalid_argument("summary CSV: unexpected header");
  }
  std::vector<AggregateReport> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != 10) throw std::invalid_argument("summary CSV: expected 10 fields");
    AggregateReport r;
    r.benchmark = f[0];
    r.kernel = f[1];
    r.param = to_double(f[2]);
    r.mean_pf = to_double(f[3]);
    r.empirical_cov = to_double(f[4]);
    r.mean_delta_f = to_double(f[5]);
    r.mean_ng = to_double(f[6]);
    r.eff = to_double(f[7]);
    r.reps = static_cast<int>(to_u64(f[8]));
    r.seed = to_u64(f[9]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RepetitionRow> parse_detail_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != kDetailHeader) {
    throw std::invalid_argument("detail CSV: unexpected header");
  }
  std::vector<RepetitionRow> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != 5) throw std::invalid_argument("detail CSV: expected 5 fields");
    RepetitionRow row;
    row.rep = static_cast<int>(to_u64(f[0]));
    row.pf_hat = to_double(f[1]);
    row.delta_f_hat = to_double(f[2]);
    row.ng = to_u64(f[3]);
    row.levels = static_cast<int>(to_u64(f[4]));
    out.push_back(row);
  }
  return out;
}

std::vector<AggregateReport> parse_summary_json_lines(std::string_view text) {
  std::vector<AggregateReport> out;
  for (std::string_view line : lines_of(text)) {
    const json j = json::parse(line);
    AggregateReport r;
    r.benchmark = j.at("benchmark").get<std::string>();
    r.kernel = j.at("kernel").get<std::string>();
    r.param = j.at("param").get<double>();
    r.mean_pf = j.at("pf_mean").get<double>();
    r.empirical_cov = j.at("cov_emp").get<double>();
    r.mean_delta_f = j.at("delta_f_mean").get<double>();
    r.mean_ng = j.at("ng_mean").get<double>();
    r.eff = j.at("eff").get<double>();
    r.reps = j.at("reps").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& jr : j.at("rows")) {
      RepetitionRow row;
      row.rep = jr.at("rep").get<int>();
      row.pf_hat = jr.at("pf_hat").get<double>();
      row.delta_f_hat = jr.at("delta_f_hat").get<double>();
      row.ng = jr.at("ng").get<std::uint64_t>();
      row.levels = jr.at("levels").get<int>();
      r.rows.push_back(row);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string detail_path(const std::string& summary_path, std::size_t index) {
  std::filesystem::path p(summary_path);
  const std::string stem = p.stem().string();
  p.replace_filename(stem + "_reps_" + std::to_string(index) + ".csv");
  return p.string();
}

namespace {

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << content;
  os.close();
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

void emit_report(const std::vector<AggregateReport>& reports, const std::string& path,
                 ReportFormat format) {
  if (format == ReportFormat::json_lines) {
    write_file(path, summary_json_lines(reports));
    return;
  }
  write_file(path, summary_csv(reports));
  for (std::size_t i = 0; i < reports.size(); ++i) {
    write_file(detail_path(path, i), detail_csv(reports[i]));
  }
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

}  // namespace

RunPlan parse_run_plan(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(root,
                 {"benchmark", "params", "sweep", "kernel", "subset", "sampler", "repetitions",
                  "seed", "workers", "output", "format"},
                 "config");
  ExperimentConfig base;
  read(root, "benchmark", base.benchmark);
  if (auto it = root.find("params"); it != root.end()) {
    if (!it->is_object()) throw ConfigError("params must be an object");
    for (const auto& [k, v] : it->items()) {
      if (!v.is_number()) throw ConfigError("parameter '" + k + "' must be numeric");
      base.params[k] = v.get<double>();
    }
  }
  if (auto it = root.find("kernel"); it != root.end()) {
    base.kernel = kernel_from_string(it->get<std::string>());
  }
  if (auto it = root.find("subset"); it != root.end()) {
    reject_unknown(*it, {"n", "p0", "max_levels", "thinning_lag", "initial"}, "subset");
    read(*it, "n", base.subset.n);
    read(*it, "p0", base.subset.p0);
    read(*it, "max_levels", base.subset.max_levels);
    read(*it, "thinning_lag", base.subset.thinning_lag);
    std::string initial = "iid";
    read(*it, "initial", initial);
    if (initial == "iid") {
      base.subset.initial = InitialSampling::iid;
    } else if (initial == "mcmc") {
      base.subset.initial = InitialSampling::mcmc;
    } else {
      throw ConfigError("subset.initial must be iid or mcmc");
    }
  }
  if (auto it = root.find("sampler"); it != root.end()) {
    reject_unknown(*it,
                   {"t_f", "alpha", "dt", "a_low", "a_up", "a_star", "n_a", "toll", "max_iter",
                    "mh_width", "hit_solver", "period_step_cap", "adapt"},
                   "sampler");
    SamplerConfig& s = base.sampler;
    read(*it, "t_f", s.t_f);
    read(*it, "alpha", s.alpha);
    read(*it, "dt", s.dt);
    read(*it, "a_low", s.a_low);
    read(*it, "a_up", s.a_up);
    read(*it, "a_star", s.a_star);
    read(*it, "n_a", s.n_a);
    read(*it, "toll", s.toll);
    read(*it, "max_iter", s.max_iter);
    read(*it, "mh_width", s.mh_width);
    read(*it, "period_step_cap", s.period_step_cap);
    read(*it, "adapt", s.adapt);
    if (auto h = it->find("hit_solver"); h != it->end()) {
      s.hit_solver = hit_solver_from_string(h->get<std::string>());
    }
  }
  read(root, "repetitions", base.repetitions);
  read(root, "seed", base.seed);
  read(root, "workers", base.workers);

  RunPlan plan;
  read(root, "output", plan.output);
  std::string format = "csv";
  read(root, "format", format);
  plan.format = report_format_from_string(format);

  if (auto it = root.find("sweep"); it != root.end()) {
    reject_unknown(*it, {"param", "values"}, "sweep");
    const std::string name = it->at("param").get<std::string>();
    const auto& values = it->at("values");
    if (!values.is_array() || values.empty()) throw ConfigError("sweep.values must be non-empty");
    for (const auto& v : values) {
      ExperimentConfig c = base;
      c.params[name] = v.get<double>();
      plan.experiments.push_back(std::move(c));
    }
  } else {
    plan.experiments.push_back(base);
  }
  return plan;
}

}  // namespace hmcss
