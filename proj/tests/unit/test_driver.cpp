#include <gtest/gtest.h>

#include <fstream>

#include "campaign_fixture.hpp"
#include "vvuq/campaign/store.hpp"
#include "vvuq/core/errors.hpp"
#include "vvuq/core/process.hpp"
#include "vvuq/driver/analyze.hpp"
#include "vvuq/driver/executor.hpp"
#include "vvuq/vvp/ensemble.hpp"

namespace vvuq::driver {
namespace {

namespace fs = std::filesystem;
using campaign::RunStatus;
using campaign::Store;
using nlohmann::json;
using testing::read_text;
using testing::TempDir;
using testing::write_text;

// Echo app: copies the rendered input to the output, so QoIs equal inputs.
json copy_config(const TempDir& dir, const json& params, const std::string& script = "cp input.csv out.csv") {
  std::string header, row;
  std::vector<std::string> cols;
  for (const auto& p : params) {
    const auto n = p.at("name").get<std::string>();
    header += (header.empty() ? "" : ",") + n;
    row += (row.empty() ? "$" : ",$") + n;
    cols.push_back(n);
  }
  write_text(dir / "input.csv", header + "\n" + row + "\n");
  return {{"name", "copy"},
          {"app",
           {{"template", (dir / "input.csv").string()},
            {"command", {"/bin/sh", "-c", script}},
            {"decoder", {{"output", "out.csv"}, {"format", "csv"}, {"qoi_columns", cols}}}}},
          {"parameters", params}};
}

json two_params() {
  return json::array({testing::uniform_param("a", 0, 1), testing::uniform_param("b", 0, 1)});
}

RunPlan plan(ExecutorKind k, int workers = 1) {
  RunPlan p;
  p.executor = k;
  p.workers = workers;
  p.allocation_cores = 2;
  p.shim = VVUQ_UQ_BIN;
  return p;
}

std::map<RunStatus, std::size_t> counts(const Store& s) { return s.status_counts(); }

TEST(Executor, LocalPoolRunsEverything) {
  TempDir d;
  auto store = Store::create(d / "wd", campaign::parse_config(copy_config(d, two_params()), d.path()));
  store.add_stage(sampling::McSpec{10, 1});
  const auto s = run_campaign(store, plan(ExecutorKind::local_pool, 4));
  EXPECT_EQ(s.launched, 10u);
  EXPECT_EQ(s.failed, 0u);
  EXPECT_TRUE(s.failed_runs.empty());
  EXPECT_EQ(counts(store).at(RunStatus::COLLATED), 10u);
  for (const auto& r : store.runs()) EXPECT_EQ(store.qoi_value(r.run_id, "a")->at(0), r.params[0]);
}

TEST(Executor, WithoutCollateRunsStayCompleted) {
  TempDir d;
  auto store = Store::create(d / "wd", campaign::parse_config(copy_config(d, two_params()), d.path()));
  store.add_stage(sampling::McSpec{4, 1});
  auto p = plan(ExecutorKind::serial);
  p.auto_collate = false;
  run_campaign(store, p);
  EXPECT_EQ(counts(store).at(RunStatus::COMPLETED), 4u);
  EXPECT_EQ(collate(store), 4u);
  EXPECT_EQ(counts(store).at(RunStatus::COLLATED), 4u);
}

TEST(Executor, OneFailingRunWithoutRetry) {
  TempDir d;
  const auto cfg = copy_config(d, two_params(), "case \"$(basename \"$PWD\")\" in run_000003) exit 9;; esac; cp input.csv out.csv");
  auto store = Store::create(d / "wd", campaign::parse_config(cfg, d.path()));
  store.add_stage(sampling::McSpec{10, 1});
  const auto s = run_campaign(store, plan(ExecutorKind::local_pool, 4));
  EXPECT_EQ(s.failed_runs, std::vector<std::int64_t>{3});
  EXPECT_EQ(counts(store).at(RunStatus::COLLATED), 9u);
  EXPECT_EQ(counts(store).at(RunStatus::FAILED), 1u);
  EXPECT_EQ(store.run(3).exit_code, 9);
}

TEST(Executor, RetryRecoversFlakyRun) {
  TempDir d;
  // fails on the first attempt of every run, succeeds afterwards
  const auto cfg = copy_config(d, two_params(), "if [ ! -e seen ]; then touch seen; exit 1; fi; cp input.csv out.csv");
  auto store = Store::create(d / "wd", campaign::parse_config(cfg, d.path()));
  store.add_stage(sampling::McSpec{5, 1});
  auto p = plan(ExecutorKind::local_pool, 2);
  p.retry_limit = 1;
  const auto s = run_campaign(store, p);
  EXPECT_EQ(s.failed, 5u);
  EXPECT_EQ(s.retried, 5u);
  EXPECT_TRUE(s.failed_runs.empty());
  EXPECT_EQ(counts(store).at(RunStatus::COLLATED), 5u);
  for (const auto& r : store.runs()) EXPECT_EQ(r.attempts, 1);
}

TEST(Executor, ResumeAfterFailureRerunsOnlyFailed) {
  TempDir d;
  const auto marker = (d / "allow").string();
  const auto cfg = copy_config(d, two_params(),
                               "echo x >> count; case \"$(basename \"$PWD\")\" in run_000002) [ -e " + marker +
                                   " ] || exit 4;; esac; cp input.csv out.csv");
  auto store = Store::create(d / "wd", campaign::parse_config(cfg, d.path()));
  store.add_stage(sampling::McSpec{4, 1});
  run_campaign(store, plan(ExecutorKind::serial));
  EXPECT_EQ(counts(store).at(RunStatus::FAILED), 1u);
  write_text(marker, "");
  store.resume();
  const auto s = run_campaign(store, plan(ExecutorKind::serial));
  EXPECT_EQ(s.launched, 1u);
  EXPECT_EQ(counts(store).at(RunStatus::COLLATED), 4u);
  EXPECT_EQ(read_text(d / "wd" / "runs" / "run_000001" / "count"), "x\n");
  EXPECT_EQ(read_text(d / "wd" / "runs" / "run_000002" / "count"), "x\nx\n");
}

TEST(Executor, PilotJobWritesReport) {
  TempDir d;
  auto store = Store::create(d / "wd", campaign::parse_config(copy_config(d, two_params()), d.path()));
  store.add_stage(sampling::McSpec{6, 1});
  const auto s = run_campaign(store, plan(ExecutorKind::pilotjob));
  EXPECT_EQ(counts(store).at(RunStatus::COLLATED), 6u);
  ASSERT_TRUE(s.report);
  EXPECT_EQ(s.report->tasks.size(), 6u);
  EXPECT_TRUE(fs::exists(d / "wd" / "pj-report.json"));
}

TEST(Executor, ExecutorsAgreeBitwise) {
  std::vector<std::map<std::int64_t, std::vector<double>>> frames;
  for (auto k : {ExecutorKind::serial, ExecutorKind::local_pool, ExecutorKind::pilotjob}) {
    TempDir d;
    auto cfg = json::parse(read_text(fs::path(VVUQ_DEMO_DIR) / "config.json"));
    cfg["app"]["template"] = (fs::path(VVUQ_DEMO_DIR) / "params.template").string();
    cfg["app"]["command"][0] = VVUQ_TOY_BIN;
    auto store = Store::create(d / "wd", campaign::parse_config(cfg, d.path()));
    store.add_stage(sampling::ScSpec{1, sampling::Growth::clenshaw_curtis, true});
    run_campaign(store, plan(k, 3));
    frames.push_back(store.qoi_values("dead"));
  }
  EXPECT_EQ(frames[0].size(), 13u);
  EXPECT_EQ(frames[0], frames[1]);
  EXPECT_EQ(frames[0], frames[2]);
}

TEST(Executor, StopFlagLeavesRestPending) {
  TempDir d;
  auto store = Store::create(d / "wd", campaign::parse_config(copy_config(d, two_params()), d.path()));
  store.add_stage(sampling::McSpec{5, 1});
  std::atomic<bool> stop{true};
  const auto s = run_campaign(store, plan(ExecutorKind::serial), &stop);
  EXPECT_TRUE(s.interrupted);
  EXPECT_EQ(s.launched, 0u);
  EXPECT_EQ(counts(store).at(RunStatus::NEW), 5u);
}

TEST(Executor, PlanValidation) {
  RunPlan p;
  p.workers = 0;
  EXPECT_THROW(validate(p), ConfigError);
  p.workers = 1;
  p.retry_limit = -1;
  EXPECT_THROW(validate(p), ConfigError);
  EXPECT_EQ(parse_executor("local-pool"), ExecutorKind::local_pool);
  EXPECT_THROW(parse_executor("slurm"), ConfigError);
}

// analysis through the store

Store collated_store(const TempDir& d, const json& params, const sampling::SamplerSpec& spec,
                     const std::string& script = "cp input.csv out.csv") {
  auto store = Store::create(d / "wd", campaign::parse_config(copy_config(d, params, script), d.path()));
  store.add_stage(spec);
  run_campaign(store, plan(ExecutorKind::serial));
  return store;
}

TEST(Analyze, SpectralOnEchoOutputs) {
  TempDir d;
  auto store = collated_store(d, two_params(), sampling::PceSpec{2});
  const auto r = analyze(store, AnalyzeOptions{"a", {}});
  EXPECT_EQ(r.method, "spectral");
  ASSERT_EQ(r.parameters, (std::vector<std::string>{"a", "b"}));
  EXPECT_NEAR(*r.first[0][0], 1.0, 1e-10);
  EXPECT_NEAR(*r.first[1][0], 0.0, 1e-10);
  EXPECT_NEAR(r.mean[0], 0.5, 1e-12);
  EXPECT_NEAR(*r.variance[0], 1.0 / 12.0, 1e-12);
  const auto csv = r.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "time,parameter,S_i,ST_i,mean,variance");
  EXPECT_NE(r.table().find("S_i"), std::string::npos);
}

TEST(Analyze, DegenerateVarianceIsUndef) {
  TempDir d;
  auto store = collated_store(d, two_params(), sampling::PceSpec{1}, "printf 'a,b\\n1,1\\n' > out.csv");
  const auto r = analyze(store, AnalyzeOptions{"a", {}});
  EXPECT_FALSE(r.first[0][0]);
  EXPECT_NE(r.to_csv().find(",a,undef,undef,1,"), std::string::npos);
  EXPECT_NE(r.table().find("undef"), std::string::npos);
}

TEST(Analyze, UnknownQoiListsAvailable) {
  TempDir d;
  auto store = collated_store(d, two_params(), sampling::McSpec{3, 1});
  try {
    analyze(store, AnalyzeOptions{"zzz", {}});
    FAIL();
  } catch (const NotFound& e) {
    EXPECT_NE(std::string(e.what()).find("a, b"), std::string::npos);
  }
}

TEST(Analyze, MissingRunsListed) {
  TempDir d;
  auto store = Store::create(d / "wd", campaign::parse_config(copy_config(d, two_params()), d.path()));
  store.add_stage(sampling::McSpec{3, 1});
  store.add_stage(sampling::PceSpec{1});
  run_campaign(store, plan(ExecutorKind::serial));
  store.add_stage(sampling::McSpec{2, 2});
  try {
    analyze(store, {"a", {3}});
    FAIL();
  } catch (const MissingRunError& e) {
    EXPECT_NE(std::string(e.what()).find("8, 9"), std::string::npos);
  }
  AnalyzeOptions o{"a", {1, 3}};
  o.allow_missing = true;
  const auto r = analyze(store, o);
  EXPECT_EQ(r.runs_used, 3u);
  EXPECT_EQ(r.runs_missing, (std::vector<std::int64_t>{8, 9}));
  EXPECT_THROW(analyze(store, {"a", {1, 2}}), ConfigError);
  EXPECT_THROW(analyze(store, {"a", {7}}), ConfigError);
  EXPECT_EQ(analyze(store, {"a", {2}}).method, "spectral");
}

TEST(Analyze, McMomentsAndBootstrap) {
  TempDir d;
  auto store = collated_store(d, two_params(), sampling::McSpec{200, 4});
  const auto r = analyze(store, AnalyzeOptions{"b", {}});
  EXPECT_EQ(r.method, "mc");
  ASSERT_EQ(r.mean_ci.size(), 1u);
  EXPECT_LE(r.mean_ci[0].lower, r.mean[0]);
  EXPECT_GE(r.mean_ci[0].upper, r.mean[0]);
  EXPECT_NEAR(r.mean[0], 0.5, 0.08);
  EXPECT_EQ(r.to_csv().substr(0, 40), "time,mean,variance,mean_lower,mean_upper");
}

TEST(Analyze, ReportFilesWithLatestCopies) {
  TempDir d;
  const auto f = write_report_files(d.path(), "analysis-x", json{{"k", 1}}, std::string("a,b\n"));
  const auto g = write_report_files(d.path(), "analysis-x", json{{"k", 2}}, std::string("a,b\n1,2\n"));
  EXPECT_NE(f.json, g.json);
  EXPECT_TRUE(fs::exists(f.json));
  EXPECT_EQ(read_text(d / "reports" / "analysis-x-latest.csv"), "a,b\n1,2\n");
  EXPECT_EQ(json::parse(read_text(d / "reports" / "analysis-x-latest.json"))["k"], 2);
}

// ensemble validation

TEST(Ensemble, MareScoresAndAggregates) {
  TempDir d;
  auto store = collated_store(d, two_params(), sampling::PceSpec{1});
  const auto a = store.qoi_values("a");
  const auto s = vvp::ensemble_validate(store, vvp::ScorerSpec::builtin_mare("a", {0.5}), vvp::Aggregator::max);
  ASSERT_EQ(s.per_run.size(), 4u);
  double mx = 0.0;
  for (const auto& [id, v] : a) {
    EXPECT_DOUBLE_EQ(s.per_run.at(id), std::abs(v[0] - 0.5) / 0.5);
    mx = std::max(mx, s.per_run.at(id));
  }
  EXPECT_DOUBLE_EQ(s.aggregate, mx);
  EXPECT_EQ(store.scores("mare:a"), s.per_run);
  const auto w = vvp::ensemble_validate(store, vvp::ScorerSpec::builtin_mare("a", {0.5}), vvp::Aggregator::weighted_mean);
  EXPECT_GE(w.aggregate, 0.0);
}

TEST(Ensemble, PerfectMatchIsZero) {
  TempDir d;
  auto store = collated_store(d, two_params(), sampling::McSpec{3, 1}, "printf 'a,b\\n2,2\\n' > out.csv");
  for (auto agg : {vvp::Aggregator::mean, vvp::Aggregator::max})
    EXPECT_EQ(vvp::ensemble_validate(store, vvp::ScorerSpec::builtin_mare("a", {2.0}), agg).aggregate, 0.0);
}

TEST(Ensemble, ExternalScorer) {
  TempDir d;
  auto store = collated_store(d, two_params(), sampling::McSpec{3, 1});
  const auto s = vvp::ensemble_validate(
      store, vvp::ScorerSpec::external({"/bin/sh", "-c", "basename \"$1\" | tr -dc 0-9 | sed 's/^0*//'", "x"}),
      vvp::Aggregator::mean);
  EXPECT_EQ(s.per_run.at(1), 1.0);
  EXPECT_EQ(s.per_run.at(3), 3.0);
  EXPECT_DOUBLE_EQ(s.aggregate, 2.0);
}

TEST(Ensemble, ScorerErrorsNameRun) {
  TempDir d;
  auto store = collated_store(d, two_params(), sampling::McSpec{3, 1});
  const std::vector<std::vector<std::string>> bad = {
      {"/bin/sh", "-c", "case \"$1\" in *run_000002) exit 3;; esac; echo 1", "x"},
      {"/bin/sh", "-c", "case \"$1\" in *run_000002) echo nope;; *) echo 1;; esac", "x"},
      {"/bin/sh", "-c", "case \"$1\" in *run_000002) echo 1 2;; *) echo 1;; esac", "x"}};
  for (const auto& cmd : bad) {
    try {
      vvp::ensemble_validate(store, vvp::ScorerSpec::external(cmd), vvp::Aggregator::mean);
      FAIL();
    } catch (const ScorerError& e) {
      EXPECT_NE(std::string(e.what()).find("run 2"), std::string::npos) << e.what();
    }
  }
}

TEST(Ensemble, RequiresCollatedRuns) {
  TempDir d;
  auto store = Store::create(d / "wd", campaign::parse_config(copy_config(d, two_params()), d.path()));
  store.add_stage(sampling::McSpec{2, 1});
  EXPECT_THROW(vvp::ensemble_validate(store, vvp::ScorerSpec::builtin_mare("a", {1}), vvp::Aggregator::mean),
               MissingRunError);
}

TEST(Ensemble, Mare) {
  EXPECT_DOUBLE_EQ(vvp::mare(std::vector<double>{1, 3}, std::vector<double>{2, 2}), 0.5);
  EXPECT_DOUBLE_EQ(vvp::mare(std::vector<double>{5, 3}, std::vector<double>{0, 2}), 0.5);
  EXPECT_THROW(vvp::mare(std::vector<double>{1}, std::vector<double>{1, 2}), ScorerError);
  EXPECT_THROW(vvp::mare(std::vector<double>{1}, std::vector<double>{0}), ScorerError);
}

}  // namespace
}  // namespace vvuq::driver
