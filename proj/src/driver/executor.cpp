#include "vvuq/driver/executor.hpp"

#include <unistd.h>

#include <deque>
#include <map>
#include <memory>
#include <set>
#include <thread>

#include "vvuq/campaign/run_protocol.hpp"
#include "vvuq/core/errors.hpp"
#include "vvuq/core/process.hpp"
#include "vvuq/pilotjob/manager.hpp"
#include "vvuq/pilotjob/service.hpp"

namespace vvuq::driver {

namespace fs = std::filesystem;
using campaign::RunStatus;
using nlohmann::json;
using pilotjob::JobEvent;
using pilotjob::JobSpec;
using pilotjob::JobStatus;

std::string to_string(ExecutorKind k) {
  switch (k) {
    case ExecutorKind::serial: return "serial";
    case ExecutorKind::local_pool: return "local-pool";
    case ExecutorKind::pilotjob: return "pilotjob";
  }
  return "?";
}

ExecutorKind parse_executor(const std::string& s) {
  if (s == "serial") return ExecutorKind::serial;
  if (s == "local-pool") return ExecutorKind::local_pool;
  if (s == "pilotjob") return ExecutorKind::pilotjob;
  throw ConfigError("unknown executor '" + s + "' (expected serial, local-pool or pilotjob)");
}

void validate(const RunPlan& plan) {
  if (plan.workers < 1) throw ConfigError("--workers must be >= 1");
  if (plan.allocation_cores < 0) throw ConfigError("--allocation-cores must be >= 1");
  if (plan.cores_per_run < 1) throw ConfigError("cores per run must be >= 1");
  if (plan.retry_limit < 0) throw ConfigError("retry limit must be >= 0");
}

namespace {

// Where runs go: an in-process manager, or one reached over its socket.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual void submit(const JobSpec& spec) = 0;
  virtual std::vector<JobEvent> events(double timeout) = 0;
  virtual pilotjob::SchedulerReport finish() = 0;
  virtual int total_cores() const = 0;
};

class LocalBackend : public Backend {
 public:
  LocalBackend(pilotjob::Allocation alloc, const fs::path& workdir) : mgr_({std::move(alloc), workdir}) {}
  void submit(const JobSpec& spec) override { mgr_.submit({spec}); }
  std::vector<JobEvent> events(double timeout) override { return mgr_.take_events(timeout); }
  pilotjob::SchedulerReport finish() override { return mgr_.finish(); }
  int total_cores() const override { return mgr_.total_cores(); }

 protected:
  pilotjob::Manager mgr_;
};

// The manager serves its socket from a thread; the driver talks to it only
// through the client, as an external tool would.
class SocketBackend : public Backend {
 public:
  SocketBackend(pilotjob::Allocation alloc, const fs::path& workdir, const fs::path& socket)
      : mgr_({std::move(alloc), workdir}), server_(mgr_, socket) {
    thread_ = std::thread([this] { server_.serve(); });
    client_ = std::make_unique<pilotjob::Client>(socket);
  }
  ~SocketBackend() override {
    client_.reset();
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }
  void submit(const JobSpec& spec) override {
    client_->call("submit", pilotjob::to_json(spec));
    pending_.insert(spec.name);
  }
  std::vector<JobEvent> events(double timeout) override {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout);
    for (;;) {
      std::vector<JobEvent> out;
      const auto st = client_->call("status");
      for (auto it = pending_.begin(); it != pending_.end();) {
        const auto status = st.at("jobs").at(*it).get<std::string>();
        if (status == "SUCCEEDED" || status == "FAILED" || status == "CANCELED" || status == "OMITTED") {
          JobEvent e;
          e.name = *it;
          e.status = status == "SUCCEEDED" ? JobStatus::SUCCEEDED
                     : status == "FAILED"  ? JobStatus::FAILED
                     : status == "CANCELED" ? JobStatus::CANCELED
                                            : JobStatus::OMITTED;
          const auto detail = client_->call("status", {{"name", *it}});
          for (const auto& t : detail.at("tasks"))
            if (t.contains("exit_code")) e.exit_code = t.at("exit_code").get<int>();
          out.push_back(std::move(e));
          it = pending_.erase(it);
        } else {
          ++it;
        }
      }
      if (!out.empty() || std::chrono::steady_clock::now() >= deadline) return out;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
  pilotjob::SchedulerReport finish() override {
    client_->call("finish");
    if (thread_.joinable()) thread_.join();
    return *server_.report();
  }
  int total_cores() const override { return mgr_.total_cores(); }

 private:
  pilotjob::Manager mgr_;
  pilotjob::Server server_;
  std::thread thread_;
  std::unique_ptr<pilotjob::Client> client_;
  std::set<std::string> pending_;
};

fs::path default_socket(const fs::path& workdir) {
  fs::path p = fs::absolute(workdir) / "pj.sock";
  if (p.string().size() < 100) return p;
  return fs::temp_directory_path() / ("vvuq-pj-" + std::to_string(::getpid()) + ".sock");
}

std::unique_ptr<Backend> make_backend(const RunPlan& plan, const campaign::Store& store) {
  using pilotjob::Allocation;
  using pilotjob::AllocationMode;
  using pilotjob::Node;
  const fs::path wd = store.workdir();
  switch (plan.executor) {
    case ExecutorKind::serial:
      return std::make_unique<LocalBackend>(Allocation{{Node{"local", plan.cores_per_run}}, AllocationMode::virtual_}, wd);
    case ExecutorKind::local_pool:
      return std::make_unique<LocalBackend>(
          Allocation{{Node{"local", plan.workers * plan.cores_per_run}}, AllocationMode::virtual_}, wd);
    case ExecutorKind::pilotjob: {
      const int cores = plan.allocation_cores > 0 ? plan.allocation_cores : pilotjob::detected_cores();
      Allocation a{{Node{"local", cores}}, AllocationMode::local};
      pilotjob::validate(a);
      if (plan.cores_per_run > cores)
        throw ConfigError("runs need " + std::to_string(plan.cores_per_run) + " cores but the allocation has " +
                          std::to_string(cores));
      return std::make_unique<SocketBackend>(a, wd, plan.socket_path.empty() ? default_socket(wd) : plan.socket_path);
    }
  }
  throw ConfigError("unknown executor");
}

std::string job_name(const campaign::RunRecord& r) {
  auto n = campaign::run_dir_name(r.run_id);
  if (r.attempts > 0) n += ".a" + std::to_string(r.attempts);
  return n;
}

}  // namespace

std::size_t collate(campaign::Store& store, std::vector<std::string>* errors) {
  std::size_t n = 0;
  for (const auto& r : store.runs_with_status(RunStatus::COMPLETED)) {
    try {
      store.decode(r.run_id);
      ++n;
    } catch (const DecodeError& e) {
      if (errors) errors->push_back("run " + std::to_string(r.run_id) + ": " + e.what());
    }
  }
  return n;
}

RunSummary run_campaign(campaign::Store& store, const RunPlan& plan, const std::atomic<bool>* stop, const Logger& log) {
  validate(plan);
  RunSummary sum;
  auto say = [&](const std::string& m) {
    if (log) log(m);
  };

  sum.reconciled = store.reconcile_submitted();
  if (sum.reconciled) say("reconciled " + std::to_string(sum.reconciled) + " run(s) left by an earlier driver");
  if (plan.auto_collate) sum.collated += collate(store, &sum.collate_errors);

  std::deque<std::int64_t> pending;
  for (const auto& r : store.runs())
    if (r.status == RunStatus::NEW || r.status == RunStatus::ENCODED) pending.push_back(r.run_id);
  if (pending.empty()) {
    for (const auto& r : store.runs_with_status(RunStatus::FAILED)) sum.failed_runs.push_back(r.run_id);
    return sum;
  }

  const fs::path shim = plan.shim.empty() ? self_exe() : plan.shim;
  const auto& app = store.config().app;
  const std::string output = app.decoder.output == app.target ? std::string() : app.decoder.output;

  auto backend = make_backend(plan, store);
  const std::size_t window =
      plan.executor == ExecutorKind::serial ? 1 : static_cast<std::size_t>(2 * backend->total_cores());
  std::map<std::string, std::int64_t> inflight;

  auto launch = [&](std::int64_t id) {
    store.encode(id);
    const auto r = store.run(id);
    const fs::path dir = fs::absolute(store.run_path(r));
    campaign::prepare_submission(dir, r.attempts, output);
    store.transition(id, RunStatus::SUBMITTED);
    JobSpec spec;
    spec.name = job_name(r);
    spec.command = {shim.string(), "run-shim", "--run-dir", dir.string(), "--attempt", std::to_string(r.attempts), "--"};
    spec.command.insert(spec.command.end(), app.command.begin(), app.command.end());
    spec.cores = plan.cores_per_run;
    spec.workdir = dir.string();
    spec.stdout_path = "run.stdout";
    spec.stderr_path = "run.stderr";
    try {
      backend->submit(spec);
    } catch (const Error& e) {
      throw ExecutorError("cannot submit run " + std::to_string(id) + ": " + e.what());
    }
    inflight.emplace(spec.name, id);
    ++sum.launched;
  };

  auto settle = [&](const JobEvent& e) {
    auto it = inflight.find(e.name);
    if (it == inflight.end()) return;
    const std::int64_t id = it->second;
    inflight.erase(it);
    if (e.status == JobStatus::SUCCEEDED) {
      store.transition(id, RunStatus::COMPLETED, 0);
      ++sum.completed;
      if (plan.auto_collate) {
        try {
          store.decode(id);
          ++sum.collated;
        } catch (const DecodeError& err) {
          sum.collate_errors.push_back("run " + std::to_string(id) + ": " + err.what());
        }
      }
      return;
    }
    store.transition(id, RunStatus::FAILED, e.exit_code);
    ++sum.failed;
    say("run " + std::to_string(id) + " failed" +
        (e.exit_code ? " with exit code " + std::to_string(*e.exit_code) : std::string()));
    if (store.run(id).attempts < plan.retry_limit && !(stop && *stop)) {
      store.transition(id, RunStatus::ENCODED);
      ++sum.retried;
      pending.push_back(id);
    }
  };

  while (!pending.empty() || !inflight.empty()) {
    while (!(stop && *stop) && inflight.size() < window && !pending.empty()) {
      const auto id = pending.front();
      pending.pop_front();
      launch(id);
    }
    if (inflight.empty()) break;
    for (const auto& e : backend->events(0.25)) settle(e);
  }
  sum.interrupted = stop && *stop && !pending.empty();
  const auto report = backend->finish();
  if (plan.executor == ExecutorKind::pilotjob) {
    pilotjob::write_report(report, store.workdir() / pilotjob::kReportFile);
    sum.report = report;
  }
  for (const auto& r : store.runs_with_status(RunStatus::FAILED)) sum.failed_runs.push_back(r.run_id);
  return sum;
}

}  // namespace vvuq::driver
