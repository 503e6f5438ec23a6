#include "vvuq/driver/analyze.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <set>

#include "vvuq/analysis/spectral.hpp"
#include "vvuq/core/errors.hpp"
#include "vvuq/core/numeric_format.hpp"
#include "vvuq/core/process.hpp"

namespace vvuq::driver {

namespace fs = std::filesystem;
using campaign::RunStatus;
using nlohmann::json;

std::string format_index(const std::optional<double>& v) { return v ? format_double(*v) : "undef"; }

namespace {

std::string missing_list(const std::vector<std::int64_t>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size() && i < 20; ++i) s += (i ? ", " : "") + std::to_string(ids[i]);
  if (ids.size() > 20) s += ", ...";
  return s;
}

json optional_array(const std::vector<std::optional<double>>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(x ? json(*x) : json(nullptr));
  return a;
}

void analyze_spectral(const campaign::Store& store, const campaign::StageInfo& stage, AnalysisResult& r) {
  const auto& params = store.parameters();
  const auto plan = sampling::quadrature_plan(params, stage.sampler);
  const auto runs = store.runs(stage.stage_id);
  const auto values = store.qoi_values(r.qoi);
  std::vector<std::vector<double>> y;
  for (const auto& run : runs) {
    auto it = values.find(run.run_id);
    if (run.status != RunStatus::COLLATED || it == values.end()) {
      r.runs_missing.push_back(run.run_id);
      continue;
    }
    y.push_back(it->second);
  }
  if (!r.runs_missing.empty())
    throw MissingRunError("stage " + std::to_string(stage.stage_id) + " has " + std::to_string(r.runs_missing.size()) +
                          " run(s) not collated: " + missing_list(r.runs_missing));
  r.runs_used = y.size();
  const auto s = analysis::project(plan, params, y);
  const auto m = analysis::moments(s);
  const auto sob = analysis::sobol(s);
  r.mean = m.mean;
  r.variance.assign(m.variance.begin(), m.variance.end());
  for (auto i : plan.active) r.parameters.push_back(params[i].name);
  r.first = sob.first;
  r.total = sob.total;
}

void analyze_mc(const campaign::Store& store, const std::vector<int>& stages, const AnalyzeOptions& opts,
                AnalysisResult& r) {
  const auto values = store.qoi_values(r.qoi);
  std::vector<const std::vector<double>*> y;
  for (int st : stages)
    for (const auto& run : store.runs(st)) {
      auto it = values.find(run.run_id);
      if (run.status != RunStatus::COLLATED || it == values.end()) r.runs_missing.push_back(run.run_id);
      else y.push_back(&it->second);
    }
  if (!r.runs_missing.empty() && !opts.allow_missing)
    throw MissingRunError(std::to_string(r.runs_missing.size()) + " run(s) not collated: " +
                          missing_list(r.runs_missing) + " (use --allow-missing to analyse the rest)");
  if (y.empty()) throw MissingRunError("no collated runs to analyse");
  r.runs_used = y.size();
  for (const auto& p : store.parameters())
    if (!p.distribution.is_constant()) r.parameters.push_back(p.name);
  const std::size_t width = r.time.size();
  for (std::size_t t = 0; t < width; ++t) {
    std::vector<double> col;
    col.reserve(y.size());
    for (const auto* v : y) col.push_back((*v)[t]);
    double mean = 0.0;
    for (double x : col) mean += x;
    mean /= static_cast<double>(col.size());
    std::optional<double> var;
    if (col.size() > 1) {
      double ss = 0.0;
      for (double x : col) ss += (x - mean) * (x - mean);
      var = ss / static_cast<double>(col.size() - 1);
    }
    r.mean.push_back(mean);
    r.variance.push_back(var);
    r.mean_ci.push_back(analysis::bootstrap(col, analysis::MeanStat{}, opts.replicates, opts.alpha, opts.seed + t));
  }
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

}  // namespace

AnalysisResult analyze(const campaign::Store& store, const AnalyzeOptions& opts) {
  const auto names = store.qoi_names();
  if (std::find(names.begin(), names.end(), opts.qoi) == names.end()) {
    std::string avail;
    for (const auto& n : names) avail += (avail.empty() ? "" : ", ") + n;
    throw NotFound("no QoI named '" + opts.qoi + "'; available: " + (avail.empty() ? "(none collated yet)" : avail));
  }
  const auto all = store.stages();
  if (all.empty()) throw ConfigError("campaign has no sampling stages");
  std::vector<int> stages = opts.stages;
  if (stages.empty()) stages.push_back(all.back().stage_id);
  std::set<int> seen;
  for (int s : stages) {
    if (s < 1 || s > static_cast<int>(all.size())) throw ConfigError("no stage " + std::to_string(s));
    if (!seen.insert(s).second) throw ConfigError("stage " + std::to_string(s) + " selected twice");
  }

  AnalysisResult r;
  r.qoi = opts.qoi;
  r.stages = stages;
  r.time = store.qoi_index(opts.qoi);
  const auto first = store.stage(stages.front());
  if (sampling::is_quadrature(first.sampler)) {
    if (stages.size() > 1) throw ConfigError("a quadrature stage must be analysed on its own");
    if (opts.allow_missing) throw ConfigError("--allow-missing applies to Monte Carlo stages only");
    r.method = "spectral";
    analyze_spectral(store, first, r);
  } else {
    for (int s : stages)
      if (sampling::is_quadrature(store.stage(s).sampler))
        throw ConfigError("cannot pool quadrature stage " + std::to_string(s) + " with sampled stages");
    r.method = "mc";
    analyze_mc(store, stages, opts, r);
  }
  return r;
}

json AnalysisResult::to_json() const {
  json j{{"qoi", qoi},
         {"method", method},
         {"stages", stages},
         {"parameters", parameters},
         {"time", time},
         {"mean", mean},
         {"variance", optional_array(variance)},
         {"runs", {{"used", runs_used}, {"missing", runs_missing}}}};
  if (method == "spectral") {
    json f = json::object(), t = json::object();
    for (std::size_t i = 0; i < parameters.size(); ++i) {
      f[parameters[i]] = optional_array(first[i]);
      t[parameters[i]] = optional_array(total[i]);
    }
    j["sobol"] = {{"first_order", f}, {"total_order", t}};
  } else if (!mean_ci.empty()) {
    json lo = json::array(), hi = json::array();
    for (const auto& ci : mean_ci) {
      lo.push_back(ci.lower);
      hi.push_back(ci.upper);
    }
    j["bootstrap"] = {{"statistic", "mean"},
                      {"lower", lo},
                      {"upper", hi},
                      {"replicates", mean_ci.front().replicates},
                      {"alpha", mean_ci.front().alpha},
                      {"seed", mean_ci.front().seed}};
  }
  return j;
}

std::string AnalysisResult::to_csv() const {
  std::string out;
  if (method == "spectral") {
    out = "time,parameter,S_i,ST_i,mean,variance\n";
    for (std::size_t t = 0; t < time.size(); ++t)
      for (std::size_t i = 0; i < parameters.size(); ++i)
        out += format_double(time[t]) + "," + parameters[i] + "," + format_index(first[i][t]) + "," +
               format_index(total[i][t]) + "," + format_double(mean[t]) + "," + format_index(variance[t]) + "\n";
  } else {
    out = "time,mean,variance,mean_lower,mean_upper\n";
    for (std::size_t t = 0; t < time.size(); ++t)
      out += format_double(time[t]) + "," + format_double(mean[t]) + "," + format_index(variance[t]) + "," +
             format_double(mean_ci[t].lower) + "," + format_double(mean_ci[t].upper) + "\n";
  }
  return out;
}

std::string AnalysisResult::table() const {
  if (time.empty()) return "QoI '" + qoi + "' has no points\n";
  const std::size_t t = time.size() - 1;
  char line[256];
  std::string out;
  std::snprintf(line, sizeof line, "%s at time %s (%s, %zu runs)\n", qoi.c_str(), format_double(time[t]).c_str(),
                method.c_str(), runs_used);
  out += line;
  if (method == "spectral") {
    std::snprintf(line, sizeof line, "%-28s %24s %24s\n", "parameter", "S_i", "ST_i");
    out += line;
    for (std::size_t i = 0; i < parameters.size(); ++i) {
      std::snprintf(line, sizeof line, "%-28s %24s %24s\n", parameters[i].c_str(), format_index(first[i][t]).c_str(),
                    format_index(total[i][t]).c_str());
      out += line;
    }
  }
  std::snprintf(line, sizeof line, "%-28s %24s\n%-28s %24s\n", "mean", format_double(mean[t]).c_str(), "variance",
                format_index(variance[t]).c_str());
  out += line;
  if (method == "mc") {
    std::snprintf(line, sizeof line, "%-28s %24s\n%-28s %24s\n", "mean lower", format_double(mean_ci[t].lower).c_str(),
                  "mean upper", format_double(mean_ci[t].upper).c_str());
    out += line;
  }
  return out;
}

ReportFiles write_report_files(const fs::path& workdir, const std::string& stem, const json& doc,
                               const std::optional<std::string>& csv) {
  const fs::path dir = workdir / "reports";
  fs::create_directories(dir);
  const std::string ts = timestamp();
  std::string base = stem + "-" + ts;
  for (int k = 1; fs::exists(dir / (base + ".json")); ++k) base = stem + "-" + ts + "-" + std::to_string(k);
  ReportFiles f;
  const std::string text = doc.dump(2) + "\n";
  f.json = dir / (base + ".json");
  write_file_atomic(f.json, text);
  write_file_atomic(dir / (stem + "-latest.json"), text);
  if (csv) {
    f.csv = dir / (base + ".csv");
    write_file_atomic(f.csv, *csv);
    write_file_atomic(dir / (stem + "-latest.csv"), *csv);
  }
  return f;
}

}  // namespace vvuq::driver
