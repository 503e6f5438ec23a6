// Campaign driver: init, sample, run, collate, analyze, validate, status, resume.
#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_common.hpp"
#include "vvuq/campaign/run_protocol.hpp"
#include "vvuq/campaign/sampler_json.hpp"
#include "vvuq/campaign/store.hpp"
#include "vvuq/core/numeric_format.hpp"
#include "vvuq/core/process.hpp"
#include "vvuq/driver/analyze.hpp"
#include "vvuq/driver/executor.hpp"
#include "vvuq/pilotjob/manager.hpp"
#include "vvuq/vvp/ensemble.hpp"
#include "vvuq/vvp/similarity.hpp"

namespace fs = std::filesystem;
using namespace vvuq;
using campaign::RunStatus;
using campaign::Store;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_interrupt(int sig) {
  if (g_stop.exchange(true)) {
    std::signal(sig, SIG_DFL);
    std::raise(sig);
  }
}

std::string g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// First line split on commas, trimmed.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(0, 1);
    out.push_back(cell);
  }
  return out;
}

/// One numeric column of a CSV file: the column named `name` when the file
/// has a header containing it, otherwise the first column.
std::vector<double> read_column(const fs::path& file, const std::string& name) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read reference " + file.string());
  std::string line;
  std::vector<double> out;
  std::size_t col = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (first) {
      first = false;
      if (!parse_double(cells.at(0))) {
        for (std::size_t i = 0; i < cells.size(); ++i)
          if (cells[i] == name) col = i;
        continue;
      }
    }
    if (col >= cells.size()) throw ConfigError("reference row has too few columns: " + line);
    const auto v = parse_double(cells[col]);
    if (!v) throw ConfigError("reference value '" + cells[col] + "' is not a number");
    out.push_back(*v);
  }
  if (out.empty()) throw ConfigError("reference " + file.string() + " holds no values");
  return out;
}

vvp::Reference read_reference(const fs::path& file, const std::string& qoi) {
  if (file.extension() == ".json") {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read reference " + file.string());
    json j;
    try {
      j = json::parse(in);
      return vvp::Histogram::make(j.at("edges").get<std::vector<double>>(), j.at("masses").get<std::vector<double>>());
    } catch (const json::exception& e) {
      throw ConfigError("reference histogram " + file.string() + " needs 'edges' and 'masses': " + e.what());
    }
  }
  return read_column(file, qoi);
}

struct Common {
  std::string workdir = ".";
};

void add_workdir(CLI::App* sub, Common& c) {
  sub->add_option("--workdir", c.workdir, "campaign directory")->capture_default_str();
}

struct RunFlags {
  std::string executor = "serial";
  int workers = 1;
  int allocation_cores = 0;
  int cores_per_run = 1;
  int retry = 0;
  bool no_collate = false;
};

void add_run_flags(CLI::App* sub, RunFlags& f) {
  sub->add_option("--executor", f.executor, "serial, local-pool or pilotjob")->capture_default_str();
  sub->add_option("--workers", f.workers, "local-pool worker count")->capture_default_str();
  sub->add_option("--allocation-cores", f.allocation_cores, "pilot-job allocation size (default: detected cores)");
  sub->add_option("--cores-per-run", f.cores_per_run, "cores given to each run")->capture_default_str();
  sub->add_option("--retry", f.retry, "extra attempts for a failed run")->capture_default_str();
  sub->add_flag("--no-collate", f.no_collate, "leave finished runs COMPLETED");
}

int execute(Store& store, const RunFlags& f) {
  driver::RunPlan plan;
  plan.executor = driver::parse_executor(f.executor);
  plan.workers = f.workers;
  plan.allocation_cores = f.allocation_cores;
  plan.cores_per_run = f.cores_per_run;
  plan.retry_limit = f.retry;
  plan.auto_collate = !f.no_collate;
  std::signal(SIGINT, on_interrupt);
  std::signal(SIGTERM, on_interrupt);
  const auto s = driver::run_campaign(store, plan, &g_stop,
                                      [](const std::string& m) { std::fprintf(stderr, "uq: %s\n", m.c_str()); });
  std::printf("launched %zu, completed %zu, failed %zu, retried %zu, collated %zu\n", s.launched, s.completed,
              s.failed, s.retried, s.collated);
  if (s.report)
    std::printf("pilot job: makespan %s s, overhead %s s, report %s\n", g6(s.report->makespan).c_str(),
                g6(s.report->overhead).c_str(), (store.workdir() / pilotjob::kReportFile).c_str());
  for (const auto& e : s.collate_errors) std::fprintf(stderr, "uq: collate: %s\n", e.c_str());
  if (!s.failed_runs.empty()) {
    std::string ids;
    for (auto id : s.failed_runs) ids += (ids.empty() ? "" : " ") + std::to_string(id);
    std::printf("failed runs: %s\n", ids.c_str());
  }
  if (s.interrupted) {
    std::fprintf(stderr, "uq: interrupted; finish with 'uq resume'\n");
    return cli::kRunFailures;
  }
  return s.failed_runs.empty() && s.collate_errors.empty() ? cli::kOk : cli::kRunFailures;
}

bool dir_has_entries(const fs::path& p) { return fs::is_directory(p) && !fs::is_empty(p); }

int cmd_init(const std::string& config, const std::string& workdir, bool force) {
  if (!fs::exists(config)) throw ConfigError("config file " + config + " does not exist");
  const fs::path wd = workdir;
  if (fs::exists(wd) && !fs::is_directory(wd)) throw ConfigError(workdir + " exists and is not a directory");
  if (dir_has_entries(wd)) {
    if (!force) {
      std::fprintf(stderr, "uq: %s is not empty; refusing to initialise (use --force to replace a campaign)\n",
                   workdir.c_str());
      return cli::kRefused;
    }
    for (const auto& e : fs::directory_iterator(wd)) {
      const auto n = e.path().filename().string();
      if (n.rfind(campaign::kStoreFile, 0) == 0 || n.rfind("run_", 0) == 0 || n == "reports" ||
          n == pilotjob::kReportFile)
        fs::remove_all(e.path());
    }
  }
  const auto cfg = campaign::load_config(config);
  auto store = Store::create(wd, cfg);
  std::printf("%s\n", fs::absolute(wd / campaign::kStoreFile).c_str());
  return cli::kOk;
}

struct SampleFlags {
  std::string sampler;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t skip = 0;
  int level = -1;
  int order = -1;
  std::string growth = "cc";
  bool sparse = false;
};

int cmd_sample(Store& store, const SampleFlags& f) {
  sampling::SamplerSpec spec;
  if (f.sampler == "mc") spec = sampling::McSpec{f.n, f.seed};
  else if (f.sampler == "halton") spec = sampling::HaltonSpec{f.n, f.skip};
  else if (f.sampler == "sc") {
    if (f.level < 0) throw ConfigError("--sampler sc needs --level");
    if (f.growth != "cc" && f.growth != "linear") throw ConfigError("--growth must be cc or linear");
    spec = sampling::ScSpec{f.level, f.growth == "cc" ? sampling::Growth::clenshaw_curtis : sampling::Growth::linear,
                            f.sparse};
  } else if (f.sampler == "pce") {
    if (f.order < 0) throw ConfigError("--sampler pce needs --order");
    spec = sampling::PceSpec{f.order};
  } else {
    throw ConfigError("unknown sampler '" + f.sampler + "' (expected mc, halton, sc or pce)");
  }
  const int id = store.add_stage(spec);
  const auto st = store.stage(id);
  std::printf("stage %d: %s, %zu runs (%lld..%lld)\n", id, campaign::to_json(spec).dump().c_str(), st.sample_count,
              static_cast<long long>(st.first_run), static_cast<long long>(st.first_run + st.sample_count - 1));
  return cli::kOk;
}

int cmd_grid(const Store& store, int stage, const std::string& output) {
  std::string out = "index";
  for (const auto& p : store.parameters()) out += "," + p.name;
  out += ",weight\n";
  std::size_t k = 0;
  for (const auto& r : store.runs(stage)) {
    out += std::to_string(k++);
    for (double v : r.params) out += "," + format_double(v);
    out += "," + (r.weight ? format_double(*r.weight) : std::string()) + "\n";
  }
  if (output.empty()) std::fputs(out.c_str(), stdout);
  else write_file_atomic(output, out);
  return cli::kOk;
}

int cmd_status(const Store& store) {
  std::printf("campaign %s in %s\n", store.config().name.c_str(), fs::absolute(store.workdir()).c_str());
  std::string names;
  for (const auto& p : store.parameters()) names += (names.empty() ? "" : ", ") + p.name;
  std::printf("parameters: %zu (%s)\n", store.parameters().size(), names.c_str());
  std::printf("%-8s %-8s %8s", "stage", "sampler", "runs");
  for (auto s : campaign::kAllStatuses) std::printf(" %10s", campaign::to_string(s).c_str());
  std::printf("\n");
  auto row = [&](const std::string& label, const std::string& sampler, std::optional<int> stage) {
    const auto c = store.status_counts(stage);
    std::size_t total = 0;
    for (const auto& [k, v] : c) total += v;
    std::printf("%-8s %-8s %8zu", label.c_str(), sampler.c_str(), total);
    for (auto s : campaign::kAllStatuses) std::printf(" %10zu", c.at(s));
    std::printf("\n");
  };
  for (const auto& st : store.stages()) row(std::to_string(st.stage_id), sampling::sampler_name(st.sampler), st.stage_id);
  row("all", "", std::nullopt);
  return cli::kOk;
}

int cmd_analyze(const Store& store, const driver::AnalyzeOptions& opts) {
  const auto r = driver::analyze(store, opts);
  const auto files = driver::write_report_files(store.workdir(), "analysis-" + opts.qoi, r.to_json(), r.to_csv());
  std::fputs(r.table().c_str(), stdout);
  std::printf("report: %s\ncsv: %s\n", files.json.c_str(), files.csv.c_str());
  return cli::kOk;
}

struct ValidateFlags {
  std::string pattern = "similarity";
  std::string qoi;
  std::string metric = "hellinger";
  std::string reference;
  std::optional<std::size_t> time_index;
  bool flatten = false;
  std::string scorer = "mare";
  std::string scorer_command;
  std::string aggregator = "mean";
  std::vector<int> stages;
};

int cmd_validate(Store& store, const ValidateFlags& f) {
  json doc;
  if (f.pattern == "similarity") {
    const auto metric = vvp::parse_metric(f.metric);
    if (!metric) {
      throw ConfigError("unknown metric '" + f.metric + "'; choose one of {" + std::string(vvp::kMetricNames) + "}");
    }
    if (f.qoi.empty() || f.reference.empty()) throw ConfigError("similarity needs --qoi and --reference");
    const auto values = store.qoi_values(f.qoi);
    if (values.empty()) throw NotFound("no collated values for QoI '" + f.qoi + "'");
    std::vector<double> ensemble;
    const std::size_t width = values.begin()->second.size();
    const std::size_t k = f.time_index.value_or(width == 0 ? 0 : width - 1);
    if (!f.flatten && k >= width) throw ConfigError("--time-index " + std::to_string(k) + " is out of range");
    for (const auto& [id, v] : values) {
      if (f.flatten) ensemble.insert(ensemble.end(), v.begin(), v.end());
      else ensemble.push_back(v[k]);
    }
    const auto ref = read_reference(f.reference, f.qoi);
    const double d = vvp::similarity(ensemble, ref, *metric);
    doc = {{"pattern", "similarity"},
           {"metric", vvp::to_string(*metric)},
           {"reference", f.reference},
           {"per_qoi", {{f.qoi, d}}},
           {"aggregate", d}};
    if (!f.flatten) doc["time_index"] = k;
    std::printf("%s %s distance: %s\n", f.qoi.c_str(), vvp::to_string(*metric).c_str(), g6(d).c_str());
  } else if (f.pattern == "ensemble") {
    const auto agg = vvp::parse_aggregator(f.aggregator);
    if (!agg) throw ConfigError("unknown aggregator '" + f.aggregator + "'; choose one of {mean, weighted_mean, max}");
    vvp::ScorerSpec scorer;
    if (!f.scorer_command.empty()) {
      std::vector<std::string> argv{"/bin/sh", "-c", f.scorer_command + " \"$1\"", "scorer"};
      scorer = vvp::ScorerSpec::external(argv);
    } else if (f.scorer == "mare") {
      if (f.qoi.empty() || f.reference.empty()) throw ConfigError("the mare scorer needs --qoi and --reference");
      scorer = vvp::ScorerSpec::builtin_mare(f.qoi, read_column(f.reference, f.qoi));
    } else {
      throw ConfigError("unknown scorer '" + f.scorer + "' (use mare or --scorer-command)");
    }
    const auto score = vvp::ensemble_validate(store, scorer, *agg, f.stages);
    json per_run = json::object();
    for (const auto& [id, v] : score.per_run) per_run[std::to_string(id)] = v;
    doc = {{"pattern", "ensemble"},
           {"scorer", scorer.name()},
           {"aggregator", vvp::to_string(*agg)},
           {"per_run", per_run},
           {"aggregate", score.aggregate}};
    std::printf("%s over %zu runs (%s): %s\n", vvp::to_string(*agg).c_str(), score.per_run.size(),
                scorer.name().c_str(), g6(score.aggregate).c_str());
  } else {
    throw ConfigError("unknown pattern '" + f.pattern + "' (expected similarity or ensemble)");
  }
  const auto files = driver::write_report_files(store.workdir(), "validation-" + f.pattern, doc, std::nullopt);
  std::printf("report: %s\n", files.json.c_str());
  return cli::kOk;
}

}  // namespace

int main(int argc, char** argv) {
  // simulation commands shipped next to uq (toy-model) resolve without setup
  try {
    prepend_path(self_exe_dir());
  } catch (const Error&) {
  }

  CLI::App app{"uq: uncertainty-quantification campaigns for black-box simulations"};
  app.require_subcommand(1);
  Common common;

  std::string config;
  bool force = false;
  auto* init = app.add_subcommand("init", "create a campaign from a config file");
  init->add_option("--config", config, "campaign JSON")->required();
  add_workdir(init, common);
  init->add_flag("--force", force, "replace an existing campaign in the directory");

  SampleFlags sf;
  auto* sample = app.add_subcommand("sample", "append a sampling stage");
  add_workdir(sample, common);
  sample->add_option("--sampler", sf.sampler, "mc, halton, sc or pce")->required();
  sample->add_option("--n", sf.n, "sample count (mc, halton)");
  sample->add_option("--seed", sf.seed, "seed (mc)");
  sample->add_option("--skip", sf.skip, "leading points to skip (halton)");
  sample->add_option("--level", sf.level, "collocation level (sc)");
  sample->add_option("--growth", sf.growth, "cc or linear (sc)")->capture_default_str();
  sample->add_flag("--sparse", sf.sparse, "Smolyak sparse grid (sc)");
  sample->add_option("--order", sf.order, "polynomial order (pce)");

  int grid_stage = 1;
  std::string grid_out;
  auto* grid = app.add_subcommand("grid", "dump a stage's points and weights as CSV");
  add_workdir(grid, common);
  grid->add_option("--stage", grid_stage, "stage id")->capture_default_str();
  grid->add_option("--output", grid_out, "file instead of stdout");

  RunFlags rf;
  auto* run = app.add_subcommand("run", "execute pending runs");
  add_workdir(run, common);
  add_run_flags(run, rf);

  auto* resume = app.add_subcommand("resume", "reconcile, reset failed runs and execute what remains");
  add_workdir(resume, common);
  add_run_flags(resume, rf);

  auto* coll = app.add_subcommand("collate", "decode finished runs");
  add_workdir(coll, common);

  driver::AnalyzeOptions ao;
  auto* an = app.add_subcommand("analyze", "moments and Sobol indices");
  add_workdir(an, common);
  an->add_option("--qoi", ao.qoi, "quantity of interest")->required();
  an->add_option("--stage", ao.stages, "stage id; repeat to pool Monte Carlo stages");
  an->add_flag("--allow-missing", ao.allow_missing, "skip runs that are not collated (Monte Carlo)");
  an->add_option("--seed", ao.seed, "bootstrap seed")->capture_default_str();
  an->add_option("--replicates", ao.replicates, "bootstrap replicates")->capture_default_str();

  ValidateFlags vf;
  auto* val = app.add_subcommand("validate", "similarity or ensemble validation");
  add_workdir(val, common);
  val->add_option("--pattern", vf.pattern, "similarity or ensemble")->capture_default_str();
  val->add_option("--qoi", vf.qoi, "quantity of interest");
  val->add_option("--metric", vf.metric, "hellinger, jsd or wasserstein1")->capture_default_str();
  val->add_option("--reference", vf.reference, "CSV of reference values or JSON histogram {edges, masses}");
  val->add_option("--time-index", vf.time_index, "QoI point to compare (default: last)");
  val->add_flag("--flatten", vf.flatten, "pool every QoI point");
  val->add_option("--scorer", vf.scorer, "built-in scorer (mare)")->capture_default_str();
  val->add_option("--scorer-command", vf.scorer_command, "shell command run with the run directory as argument");
  val->add_option("--aggregator", vf.aggregator, "mean, weighted_mean or max")->capture_default_str();
  val->add_option("--stage", vf.stages, "restrict to stages");

  auto* status = app.add_subcommand("status", "run counts per status and stage");
  add_workdir(status, common);

  std::string shim_dir;
  int shim_attempt = 0;
  std::vector<std::string> shim_cmd;
  auto* shim = app.add_subcommand("run-shim", "internal: execute one run attempt");
  shim->group("");
  shim->add_option("--run-dir", shim_dir)->required();
  shim->add_option("--attempt", shim_attempt)->required();
  shim->add_option("command", shim_cmd)->required();

  CLI11_PARSE(app, argc, argv);

  if (*shim) {
    try {
      return campaign::run_shim(shim_dir, shim_attempt, shim_cmd);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "uq run-shim: %s\n", e.what());
      return 127;
    }
  }
  return cli::guarded("uq", [&]() -> int {
    if (*init) return cmd_init(config, common.workdir, force);
    auto store = Store::open(common.workdir);
    if (*sample) return cmd_sample(store, sf);
    if (*grid) return cmd_grid(store, grid_stage, grid_out);
    if (*run) return execute(store, rf);
    if (*resume) {
      const auto n = store.reconcile_submitted();
      const auto s = store.resume();
      std::printf("resume: %zu reconciled, %zu collated, %zu completed, %zu failed reset for retry, %zu pending\n", n,
                  s.collated, s.completed, s.retry, s.pending);
      return execute(store, rf);
    }
    if (*coll) {
      std::vector<std::string> errors;
      const auto n = driver::collate(store, &errors);
      std::printf("collated %zu run(s)\n", n);
      for (const auto& e : errors) std::fprintf(stderr, "uq: collate: %s\n", e.c_str());
      return errors.empty() ? cli::kOk : cli::kRunFailures;
    }
    if (*an) return cmd_analyze(store, ao);
    if (*val) return cmd_validate(store, vf);
    if (*status) return cmd_status(store);
    return cli::kUsage;
  });
}
