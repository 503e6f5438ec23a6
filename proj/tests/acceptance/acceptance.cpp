// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Pass criterion numbers to run a subset.

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "campaign_fixture.hpp"
#include "oracles.hpp"
#include "vvuq/analysis/bootstrap.hpp"
#include "vvuq/analysis/sobol_mc.hpp"
#include "vvuq/analysis/spectral.hpp"
#include "vvuq/campaign/store.hpp"
#include "vvuq/core/process.hpp"
#include "vvuq/core/rng.hpp"
#include "vvuq/driver/analyze.hpp"
#include "vvuq/driver/executor.hpp"
#include "vvuq/pilotjob/manager.hpp"
#include "vvuq/pilotjob/service.hpp"
#include "vvuq/pilotjob/simulate.hpp"
#include "vvuq/sampling/grid.hpp"
#include "vvuq/sampling/quadrature.hpp"
#include "vvuq/sampling/sampler.hpp"
#include "vvuq/vvp/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vvuq;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

CaptureResult uq(const std::vector<std::string>& args) {
  std::vector<std::string> argv{VVUQ_UQ_BIN};
  argv.insert(argv.end(), args.begin(), args.end());
  return run_capture(argv, {});
}

void require_ok(const CaptureResult& r, const std::string& what) {
  if (r.exit_code != 0) throw std::runtime_error(what + " exited " + std::to_string(r.exit_code) + ": " + r.err);
}

// 1: pilot-job overhead, wall clock and simulated

Outcome overhead() {
  setenv("PJ_VIRTUAL_CORES", "16", 1);
  testing::TempDir dir;
  pilotjob::Manager mgr({pilotjob::local_allocation(), dir.path()});
  std::vector<pilotjob::JobSpec> jobs;
  for (int i = 0; i < 1000; ++i) {
    pilotjob::JobSpec j;
    j.name = "sleep" + std::to_string(i);
    j.command = {"sleep", "1"};
    j.stdout_path = "/dev/null";
    jobs.push_back(std::move(j));
  }
  mgr.submit(std::move(jobs));
  const auto wall = mgr.finish();
  std::size_t ok = 0;
  for (const auto& t : wall.tasks) ok += t.status == pilotjob::JobStatus::SUCCEEDED;
  const bool a = ok == 1000 && wall.makespan <= 1.10 * 63.0;

  std::vector<pilotjob::JobSpec> sim;
  for (int i = 0; i < 10000; ++i) {
    pilotjob::JobSpec j;
    j.name = "j" + std::to_string(i);
    j.command = {"true"};
    j.duration = 1.0;
    sim.push_back(std::move(j));
  }
  const auto t0 = Clock::now();
  const auto r = pilotjob::simulate(pilotjob::Allocation{{pilotjob::Node{"v", 128}}, pilotjob::AllocationMode::virtual_},
                                    std::move(sim))
                     .report;
  const double sim_wall = seconds_since(t0);
  const bool b = r.tasks.size() == 10000 && r.makespan <= 1.10 * r.ideal && sim_wall < 60.0;
  return {a && b, fmt("A: %zu/1000 ok, makespan %.2f s (limit 69.3); B: makespan %.0f s, ideal %.3f s, ratio %.4f, "
                      "wall %.2f s",
                      ok, wall.makespan, r.makespan, r.ideal, r.makespan / r.ideal, sim_wall)};
}

// 2: socket submission latency

Outcome submission() {
  setenv("PJ_VIRTUAL_CORES", "16", 1);
  testing::TempDir dir;
  pilotjob::Manager mgr({pilotjob::local_allocation(), dir.path()});
  pilotjob::Server server(mgr, dir / "pj.sock");
  std::thread serving([&] { server.serve(); });
  double total = 0.0, worst = 0.0;
  {
    pilotjob::Client client(dir / "pj.sock");
    for (int i = 0; i < 1000; ++i) {
      const json job{{"name", "s" + std::to_string(i)}, {"command", {"true"}}, {"stdout", "/dev/null"}};
      const auto t0 = Clock::now();
      client.call("submit", job);
      const double dt = seconds_since(t0);
      total += dt;
      worst = std::max(worst, dt);
    }
    client.call("finish");
  }
  serving.join();
  const auto report = server.report();
  const std::size_t done = report ? report->tasks.size() : 0;
  const double mean_ms = total;  // 1000 calls: seconds total == ms per call
  return {mean_ms < 50.0 && done == 1000,
          fmt("mean %.3f ms per submission (limit 50), worst %.1f ms, %zu jobs finished", mean_ms, worst * 1e3, done)};
}

// 3: Sobol indices against analytic values

struct Model {
  const char* name;
  std::function<double(std::span<const double>)> f;
  std::vector<double> first, total;
};

Outcome sobol_oracles() {
  const auto t0 = Clock::now();
  const std::vector<Model> models{
      {"additive", [](std::span<const double> x) { return x[0] + x[1]; }, {0.5, 0.5}, {0.5, 0.5}},
      {"single-factor", [](std::span<const double> x) { return 3.0 * x[0]; }, {1.0, 0.0}, {1.0, 0.0}},
      {"bilinear", [](std::span<const double> x) { return x[0] + x[1] + x[0] * x[1]; },
       {3.0 / 7.0, 3.0 / 7.0}, {4.0 / 7.0, 4.0 / 7.0}},
  };
  std::vector<ParameterDef> space;
  for (const char* n : {"x0", "x1"})
    space.push_back({n, ParamKind::real, 0.0, sampling::Distribution1D::uniform(-1, 1)});
  const std::vector<sampling::Distribution1D> dists{space[0].distribution, space[1].distribution};

  double spectral_err = 0.0, worst_z = 0.0;
  bool ok = true;
  std::uint64_t seed = 100;
  for (const auto& m : models) {
    for (const auto& spec : std::vector<sampling::SamplerSpec>{
             sampling::PceSpec{2}, sampling::ScSpec{3, sampling::Growth::clenshaw_curtis, true}}) {
      const auto plan = sampling::quadrature_plan(space, spec);
      std::vector<std::vector<double>> values;
      for (const auto& p : plan.grid.points) {
        std::vector<double> x(p.size());
        for (std::size_t j = 0; j < p.size(); ++j) x[j] = space[plan.active[j]].distribution.from_reference(p[j]);
        values.push_back({m.f(x)});
      }
      const auto r = analysis::sobol(analysis::project(plan, space, values));
      for (std::size_t i = 0; i < 2; ++i) {
        if (!r.first[i][0] || !r.total[i][0]) return {false, std::string(m.name) + ": undefined spectral index"};
        spectral_err = std::max({spectral_err, std::abs(*r.first[i][0] - m.first[i]),
                                 std::abs(*r.total[i][0] - m.total[i])});
      }
    }
    const auto mc = analysis::sobol_mc(m.f, dists, 100000, ++seed);
    for (std::size_t i = 0; i < 2; ++i) {
      const double e1 = std::abs(mc.first[i] - m.first[i]), et = std::abs(mc.total[i] - m.total[i]);
      ok = ok && e1 <= 3.0 * mc.first_se[i] && et <= 3.0 * mc.total_se[i];
      if (mc.first_se[i] > 0) worst_z = std::max(worst_z, e1 / mc.first_se[i]);
      if (mc.total_se[i] > 0) worst_z = std::max(worst_z, et / mc.total_se[i]);
    }
  }
  const double wall = seconds_since(t0);
  ok = ok && spectral_err <= 1e-8 && wall < 30.0;
  return {ok, fmt("spectral max error %.2e (limit 1e-8); MC worst |error|/SE %.2f (limit 3); %.2f s", spectral_err,
                  worst_z, wall)};
}

// 4: Gauss exactness and Clenshaw-Curtis nesting

Outcome quadrature() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int n = 1; n <= 10; ++n) {
    for (const auto& r : {sampling::gauss_legendre(n), sampling::gauss_hermite(n)}) {
      const bool hermite = r.kind == sampling::RuleKind::gauss_hermite;
      for (int k = 0; k <= 2 * n - 1; ++k) {
        // high-degree Hermite terms reach ~1e8 and cancel, so accumulate in long double
        long double s = 0.0L;
        for (std::size_t i = 0; i < r.size(); ++i)
          s += static_cast<long double>(r.weights[i]) * std::pow(static_cast<long double>(r.nodes[i]), k);
        const double exact = hermite ? testing::normal_moment(k) : testing::uniform_moment(k);
        // Hermite moments grow like (k-1)!!, so compare relative to the moment
        const double err = std::abs(static_cast<double>(s) - exact) / std::max(1.0, std::abs(exact));
        worst = std::max(worst, err);
      }
    }
  }
  bool nested = true;
  for (int l = 0; l < 5; ++l) {
    const auto a = sampling::clenshaw_curtis(l).nodes;
    const auto b = sampling::clenshaw_curtis(l + 1).nodes;
    const std::set<double> fine(b.begin(), b.end());
    for (double x : a) nested = nested && fine.count(x) == 1;
  }
  const double wall = seconds_since(t0);
  return {worst <= 1e-10 && nested && wall < 5.0,
          fmt("max monomial error %.2e (limit 1e-10); CC levels 0-5 nested: %s; %.3f s", worst,
              nested ? "yes" : "no", wall)};
}

// 5: Smolyak grid against the brute-force combination technique

Outcome sparse_grid() {
  bool ok = true;
  double weight_diff = 0.0, sum_err = 0.0;
  std::size_t cases = 0;
  for (auto kind : {sampling::RuleKind::clenshaw_curtis, sampling::RuleKind::gauss_legendre})
    for (std::size_t d : {2u, 3u})
      for (int level : {1, 2, 3}) {
        const std::vector<sampling::RuleKind> kinds(d, kind);
        const auto sg = sampling::smolyak_grid(kinds, level);
        const auto oracle = testing::smolyak_oracle(kinds, level);
        ++cases;
        if (sg.size() != oracle.size()) {
          ok = false;
          continue;
        }
        std::size_t i = 0;
        double s = 0.0;
        for (const auto& [p, w] : oracle) {
          ok = ok && sg.points[i] == p;
          weight_diff = std::max(weight_diff, std::abs(sg.weights[i] - w));
          s += sg.weights[i];
          ++i;
        }
        sum_err = std::max(sum_err, std::abs(s - 1.0));
      }
  ok = ok && weight_diff <= 1e-14 && sum_err <= 1e-10;
  return {ok, fmt("%zu grids (CC and Gauss-Legendre, d 2-3, level 1-3): node sets %s, max weight difference %.1e, "
                  "max |sum w - 1| %.1e",
                  cases, ok ? "equal" : "differ", weight_diff, sum_err)};
}

// 6: kill the driver mid-campaign, resume, count executions

Outcome restartability() {
  testing::TempDir root;
  auto base = json::parse(testing::read_text(fs::path(VVUQ_DEMO_DIR) / "config.json"));
  base["app"]["template"] = (fs::path(VVUQ_DEMO_DIR) / "params.template").string();
  // a short sleep per run widens the window in which the driver can die
  auto slowed = [&](const fs::path& sentinels) {
    json cmd{"/bin/sh", "-c", "sleep 0.05; exec \"$@\"", "run"};
    for (const auto& a : base["app"]["command"]) cmd.push_back(a);
    cmd.push_back("--sentinel-dir");
    cmd.push_back(sentinels.string());
    auto c = base;
    c["app"]["command"] = cmd;
    return c;
  };
  auto fresh = [&](const fs::path& dir, int seed) {
    testing::write_text(dir.string() + ".json", slowed(dir / "sentinels").dump());
    const auto wd = (dir / "wd").string();
    require_ok(uq({"init", "--config", dir.string() + ".json", "--workdir", wd}), "init");
    require_ok(uq({"sample", "--workdir", wd, "--sampler", "mc", "--n", "100", "--seed", std::to_string(seed)}),
               "sample");
    return wd;
  };
  const std::vector<std::string> run_flags{"--executor", "local-pool", "--workers", "4"};
  CounterRng rng(20240601);

  const auto cal = fresh(root / "calibrate", 0);
  auto run_args = std::vector<std::string>{"run", "--workdir", cal};
  run_args.insert(run_args.end(), run_flags.begin(), run_flags.end());
  const auto t0 = Clock::now();
  require_ok(uq(run_args), "run");
  const double full = seconds_since(t0);

  int good = 0, interrupted = 0, late = 0;
  std::string problem;
  for (int trial = 0; trial < 20; ++trial) {
    fs::path dir;
    bool killed = false;
    // a kill that arrives after the driver exited does not count as a trial
    for (int attempt = 0; attempt < 5 && !killed; ++attempt) {
      dir = root / ("trial" + std::to_string(trial) + "-" + std::to_string(attempt));
      const auto wd = fresh(dir, trial);
      SpawnOptions opts;
      opts.argv = {VVUQ_UQ_BIN, "run", "--workdir", wd};
      opts.argv.insert(opts.argv.end(), run_flags.begin(), run_flags.end());
      opts.stdout_path = dir / "run.out";
      opts.stderr_path = dir / "run.err";
      opts.new_process_group = false;
      const double delay = full * (0.05 + 0.85 * rng.uniform());
      const pid_t pid = spawn_process(opts);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
      ::kill(pid, SIGKILL);
      killed = wait_process(pid) == 128 + SIGKILL;
      late += !killed;
    }
    interrupted += killed;

    const auto wd = (dir / "wd").string();
    auto resume = std::vector<std::string>{"resume", "--workdir", wd};
    resume.insert(resume.end(), run_flags.begin(), run_flags.end());
    require_ok(uq(resume), "resume");
    const auto store = campaign::Store::open(wd);
    bool trial_ok = store.status_counts().at(campaign::RunStatus::COLLATED) == 100;
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir / "sentinels")) {
      ++files;
      if (testing::read_text(e.path()) != "done\n") {
        trial_ok = false;
        problem = e.path().filename().string() + " in trial " + std::to_string(trial) + " ran more than once";
      }
    }
    trial_ok = trial_ok && files == 100;
    if (!trial_ok && problem.empty()) problem = "trial " + std::to_string(trial) + " did not collate 100 runs once";
    good += trial_ok;
  }
  return {good == 20 && interrupted == 20,
          fmt("%d/20 trials with 100 COLLATED and every sentinel count 1; %d/20 drivers killed mid-campaign "
              "(%d late kills redrawn; uninterrupted run %.2f s)%s",
              good, interrupted, late, full, problem.empty() ? "" : ("; " + problem).c_str())};
}

// 7: appending a stage leaves earlier rows and analysis untouched

Outcome staged() {
  testing::TempDir dir;
  const auto params = json::array({testing::uniform_param("a", 0, 1), testing::uniform_param("b", 0, 1)});
  auto store = campaign::Store::create(dir / "wd", campaign::parse_config(testing::echo_config(dir, params), dir.path()));
  store.add_stage(sampling::McSpec{200, 7});
  driver::RunPlan plan;
  plan.executor = driver::ExecutorKind::serial;
  plan.shim = VVUQ_UQ_BIN;
  driver::run_campaign(store, plan);
  const auto rows = store.dump_stage(1);
  const auto before = store.runs(1);
  const driver::AnalyzeOptions one{"a", {1}};
  const auto analysis = driver::analyze(store, one).to_json().dump();

  store.add_stage(sampling::McSpec{200, 8});
  driver::run_campaign(store, plan);
  const auto after = store.runs(1);
  bool same_params = before.size() == after.size();
  for (std::size_t i = 0; same_params && i < before.size(); ++i)
    same_params = std::memcmp(before[i].params.data(), after[i].params.data(),
                              before[i].params.size() * sizeof(double)) == 0;
  const bool same_rows = store.dump_stage(1) == rows;
  const bool same_analysis = driver::analyze(store, one).to_json().dump() == analysis;
  const auto pooled = driver::analyze(store, {"a", {1, 2}});
  return {same_params && same_rows && same_analysis && pooled.runs_used == 400,
          fmt("stage-1 rows %s, parameters %s, stage-1 analysis %s; pooled analysis uses %zu runs",
              same_rows ? "unchanged" : "CHANGED", same_params ? "bitwise equal" : "DIFFER",
              same_analysis ? "identical" : "DIFFERS", pooled.runs_used)};
}

// 8: metric properties

vvp::Histogram random_hist(CounterRng& rng, const std::vector<double>& edges) {
  std::vector<double> m(edges.size() - 1);
  for (auto& x : m) x = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
  m[rng.below(m.size())] += 0.1;  // never all zero
  return vvp::Histogram::make(edges, m);
}

using HistMetric = double (*)(const vvp::Histogram&, const vvp::Histogram&);

Outcome metric_properties() {
  CounterRng rng(8);
  double range_violation = 0.0, asym = 0.0, triangle = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const std::size_t bins = 1 + rng.below(30);
    std::vector<double> edges{0.0};
    for (std::size_t i = 0; i < bins; ++i) edges.push_back(edges.back() + 0.1 + rng.uniform());
    const auto p = random_hist(rng, edges), q = random_hist(rng, edges), r = random_hist(rng, edges);
    for (HistMetric d : {static_cast<HistMetric>(&vvp::hellinger), static_cast<HistMetric>(&vvp::jensen_shannon)}) {
      const double pq = d(p, q), qp = d(q, p);
      range_violation = std::max({range_violation, -pq, pq - 1.0});
      asym = std::max(asym, std::abs(pq - qp));
      triangle = std::max(triangle, pq - d(p, r) - d(r, q));
    }
  }
  double w_err = 0.0;
  for (int k = 0; k < 2000; ++k) {
    std::vector<double> a(1 + rng.below(60)), b(1 + rng.below(60));
    for (auto& x : a) x = rng.uniform() * 10.0 - 5.0;
    // some exact ties with the other sample's grid
    for (auto& x : b) x = rng.uniform() < 0.3 ? std::round(rng.uniform() * 8.0) / 2.0 : rng.uniform() * 4.0;
    w_err = std::max(w_err, std::abs(vvp::wasserstein1(a, b) - testing::wasserstein_oracle(a, b)));
  }
  const bool ok = range_violation <= 0.0 && asym <= 1e-12 && triangle <= 1e-10 && w_err <= 1e-10;
  return {ok, fmt("10^4 histogram triples: range violation %.1e, max asymmetry %.1e, max triangle excess %.1e; "
                  "W1 vs oracle max error %.1e",
                  std::max(0.0, range_violation), asym, std::max(0.0, triangle), w_err)};
}

// 9: end-to-end demo through the pilot-job executor

Outcome demo() {
  const auto t0 = Clock::now();
  testing::TempDir dir;
  const auto wd = (dir / "wd").string();
  require_ok(uq({"init", "--config", (fs::path(VVUQ_DEMO_DIR) / "config.json").string(), "--workdir", wd}), "init");
  require_ok(uq({"sample", "--workdir", wd, "--sampler", "sc", "--level", "3", "--sparse"}), "sample");
  require_ok(uq({"run", "--workdir", wd, "--executor", "pilotjob", "--allocation-cores", "4"}), "run");
  require_ok(uq({"analyze", "--workdir", wd, "--qoi", "dead"}), "analyze");
  const auto doc = json::parse(testing::read_text(fs::path(wd) / "reports" / "analysis-dead-latest.json"));
  const auto& first = doc.at("sobol").at("first_order");
  const std::size_t points = doc.at("time").size();
  bool in_range = true;
  double max_sum = 0.0;
  std::size_t undefined = 0;
  for (std::size_t t = 0; t < points; ++t) {
    double sum = 0.0;
    for (const auto& [name, series] : first.items()) {
      if (series[t].is_null()) {
        ++undefined;
        continue;
      }
      const double s = series[t].get<double>();
      in_range = in_range && s >= 0.0 && s <= 1.0;
      sum += s;
    }
    max_sum = std::max(max_sum, sum);
  }
  const double s_inf = first.at("infection_rate").back().get<double>();
  const double s_rec = first.at("recovery_period").back().get<double>();
  const double wall = seconds_since(t0);
  const bool ok = points > 0 && in_range && max_sum <= 1.0 + 1e-6 && s_inf > s_rec && wall < 300.0 &&
                  fs::exists(fs::path(wd) / "pj-report.json");
  return {ok, fmt("%zu runs, %zu time points (%zu undefined entries), S_i in [0,1]: %s, max sum S_i %.6f; "
                  "final S_infection_rate %.4f > S_recovery_period %.3g; %.1f s",
                  static_cast<std::size_t>(doc.at("runs").at("used")), points, undefined, in_range ? "yes" : "no",
                  max_sum, s_inf, s_rec, wall)};
}

// 10: bootstrap coverage

Outcome coverage() {
  const auto t0 = Clock::now();
  int covered = 0;
  for (int k = 0; k < 500; ++k) {
    CounterRng rng(31, static_cast<std::uint64_t>(k));
    std::vector<double> x(100);
    for (auto& v : x) v = 2.0 + 3.0 * testing::normal_quantile_bisection(rng.uniform());
    const auto ci = analysis::bootstrap(x, analysis::MeanStat{}, 1000, 0.05, 5000 + k);
    covered += ci.lower <= 2.0 && 2.0 <= ci.upper;
  }
  const double rate = covered / 500.0, wall = seconds_since(t0);
  return {std::abs(rate - 0.95) <= 0.03 && wall < 30.0,
          fmt("%d/500 intervals cover the mean (%.1f%%, target 95 +- 3); %.1f s", covered, rate * 100.0, wall)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"pilot-job overhead", overhead},     {"socket submission latency", submission},
      {"Sobol oracles", sobol_oracles},     {"quadrature exactness", quadrature},
      {"sparse grid vs oracle", sparse_grid}, {"restartability", restartability},
      {"staged sampling", staged},          {"metric properties", metric_properties},
      {"end-to-end demo", demo},            {"bootstrap coverage", coverage},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %2d %-26s %s  %s\n", id, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
