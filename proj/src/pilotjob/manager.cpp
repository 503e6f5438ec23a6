#include "vvuq/pilotjob/manager.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/eventfd.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <mutex>
#include <thread>

#include "vvuq/core/errors.hpp"
#include "vvuq/core/process.hpp"

namespace vvuq::pilotjob {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Proc {
  pid_t pid = -1;
  int pidfd = -1;
  TaskRef ref;
  std::optional<Clock::time_point> kill_at;
};

}  // namespace

struct Manager::Impl {
  ManagerOptions opts;
  Scheduler sched;
  Clock::time_point t0 = Clock::now();
  mutable std::mutex mu;
  std::condition_variable cv;
  std::vector<Proc> procs;
  std::deque<JobEvent> events;
  int efd = -1;
  bool stop = false;
  bool done = false;
  std::thread loop_thread;
  std::mutex join_mu;

  explicit Impl(ManagerOptions o) : opts(std::move(o)), sched(opts.allocation) {
    if (opts.workdir.empty()) opts.workdir = fs::current_path();
    opts.workdir = fs::absolute(opts.workdir);
    fs::create_directories(opts.workdir);
    efd = eventfd(0, EFD_CLOEXEC | EFD_NONBLOCK);
    if (efd < 0) throw IoError("eventfd failed");
  }

  double now() const { return std::chrono::duration<double>(Clock::now() - t0).count(); }

  void wake() const {
    const std::uint64_t one = 1;
    [[maybe_unused]] auto n = ::write(efd, &one, sizeof one);
  }

  // Moves newly terminal jobs into the event queue. Caller holds mu.
  void collect() {
    bool any = false;
    for (auto i : sched.take_terminal()) {
      const auto& j = sched.job(i);
      std::optional<int> code;
      for (const auto& t : j.tasks)
        if (t.exit_code) code = t.exit_code;
      events.push_back(JobEvent{j.spec.name, j.status, code});
      any = true;
    }
    if (any) cv.notify_all();
  }

  SpawnOptions spawn_options(const TaskRef& t) const {
    const auto& spec = sched.job(t.job).spec;
    SpawnOptions so;
    so.argv = spec.command;
    fs::path cwd = spec.workdir.empty() ? opts.workdir : fs::path(spec.workdir);
    if (cwd.is_relative()) cwd = opts.workdir / cwd;
    so.cwd = cwd;
    const std::string stem =
        spec.iterations > 1 ? spec.name + "_" + std::to_string(t.iteration) : spec.name;
    so.stdout_path = spec.stdout_path.empty() ? fs::path(stem + ".out") : fs::path(spec.stdout_path);
    if (!spec.stderr_path.empty()) so.stderr_path = fs::path(spec.stderr_path);
    so.env = spec.env;
    so.env["PJ_JOB"] = spec.name;
    so.env["PJ_ITERATION"] = std::to_string(t.iteration);
    so.new_process_group = true;
    return so;
  }

  void dispatch() {
    for (;;) {
      bool failed = false;
      for (const auto& d : sched.schedule(now())) {
        try {
          const pid_t pid = spawn_process(spawn_options(d.task));
          procs.push_back(Proc{pid, open_pidfd(pid), d.task, std::nullopt});
        } catch (const Error& e) {
          std::fprintf(stderr, "pj: %s\n", e.what());
          sched.task_finished(d.task, 127, now());
          failed = true;
        }
      }
      if (!failed) break;
    }
  }

  void reap(bool all_candidates, const std::vector<pollfd>& fds) {
    for (std::size_t i = 0; i < procs.size();) {
      auto& p = procs[i];
      bool check = all_candidates || p.pidfd < 0;
      if (!check)
        for (const auto& f : fds)
          if (f.fd == p.pidfd && (f.revents & (POLLIN | POLLHUP | POLLERR))) check = true;
      int status = 0;
      if (check && waitpid(p.pid, &status, WNOHANG) == p.pid) {
        if (p.pidfd >= 0) ::close(p.pidfd);
        const TaskRef ref = p.ref;
        procs.erase(procs.begin() + static_cast<std::ptrdiff_t>(i));
        sched.task_finished(ref, decode_wait_status(status), now());
        continue;
      }
      ++i;
    }
  }

  void loop() {
    std::unique_lock lk(mu);
    for (;;) {
      if (!stop) dispatch();
      collect();
      if (stop && procs.empty()) break;
      if (sched.closed() && sched.all_terminal()) break;

      std::vector<pollfd> fds{{efd, POLLIN, 0}};
      bool fallback = false;
      for (const auto& p : procs) {
        if (p.pidfd >= 0) fds.push_back({p.pidfd, POLLIN, 0});
        else fallback = true;
      }
      int timeout = fallback ? 10 : 1000;
      const auto tnow = Clock::now();
      for (const auto& p : procs)
        if (p.kill_at) {
          const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(*p.kill_at - tnow).count();
          timeout = std::min<int>(timeout, static_cast<int>(std::max<long long>(0, ms + 1)));
        }
      lk.unlock();
      ::poll(fds.data(), fds.size(), timeout);
      lk.lock();
      std::uint64_t drained;
      while (::read(efd, &drained, sizeof drained) > 0) {
      }
      reap(false, fds);
      const auto t = Clock::now();
      for (auto& p : procs)
        if (p.kill_at && t >= *p.kill_at) {
          ::kill(-p.pid, SIGKILL);
          p.kill_at.reset();
        }
    }
    done = true;
    cv.notify_all();
  }

  void terminate(const TaskRef& ref) {
    for (auto& p : procs)
      if (p.ref == ref) {
        ::kill(-p.pid, SIGTERM);
        p.kill_at = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                       std::chrono::duration<double>(opts.kill_grace));
      }
  }
};

Manager::Manager(ManagerOptions opts) : impl_(std::make_unique<Impl>(std::move(opts))) {
  impl_->loop_thread = std::thread([this] { impl_->loop(); });
}

Manager::~Manager() {
  {
    std::lock_guard lk(impl_->mu);
    if (!impl_->done) {
      impl_->stop = true;
      for (auto& p : impl_->procs) ::kill(-p.pid, SIGKILL);
    }
  }
  impl_->wake();
  {
    std::lock_guard jl(impl_->join_mu);
    if (impl_->loop_thread.joinable()) impl_->loop_thread.join();
  }
  ::close(impl_->efd);
}

std::vector<std::string> Manager::submit(std::vector<JobSpec> specs) {
  std::vector<std::string> names;
  {
    std::lock_guard lk(impl_->mu);
    if (impl_->done || impl_->stop) throw ValidationError("manager has finished and accepts no new jobs");
    names = impl_->sched.submit(std::move(specs), impl_->now());
    impl_->collect();
  }
  impl_->wake();
  return names;
}

void Manager::cancel(const std::string& name) {
  {
    std::lock_guard lk(impl_->mu);
    for (const auto& ref : impl_->sched.cancel(name, impl_->now())) impl_->terminate(ref);
    impl_->collect();
  }
  impl_->wake();
}

json Manager::status(const std::optional<std::string>& name) const {
  std::lock_guard lk(impl_->mu);
  const auto& s = impl_->sched;
  if (name) {
    const auto& j = s.job(*name);
    json tasks = json::array();
    for (std::size_t k = 0; k < j.tasks.size(); ++k) {
      const auto& t = j.tasks[k];
      json o{{"iteration", k}, {"status", to_string(t.status)}};
      if (t.start >= 0.0) o["start"] = t.start;
      if (t.end >= 0.0) o["end"] = t.end;
      if (t.exit_code) o["exit_code"] = *t.exit_code;
      tasks.push_back(std::move(o));
    }
    return {{"name", j.spec.name}, {"status", to_string(j.status)}, {"cores", j.spec.cores},
            {"submit", j.submit}, {"tasks", tasks}};
  }
  json jobs = json::object();
  for (std::size_t i = 0; i < s.job_count(); ++i) jobs[s.job(i).spec.name] = to_string(s.job(i).status);
  return {{"counts", s.counts()},
          {"total_cores", s.total_cores()},
          {"busy_cores", s.busy_cores()},
          {"free_cores", s.free_cores()},
          {"jobs", jobs}};
}

json Manager::resources() const {
  std::lock_guard lk(impl_->mu);
  const auto& s = impl_->sched;
  json nodes = json::array();
  const auto free = s.node_free();
  for (std::size_t i = 0; i < s.allocation().nodes.size(); ++i)
    nodes.push_back({{"name", s.allocation().nodes[i].name},
                     {"cores", s.allocation().nodes[i].cores},
                     {"free", free[i]}});
  return {{"total_cores", s.total_cores()},
          {"busy_cores", s.busy_cores()},
          {"free_cores", s.free_cores()},
          {"nodes", nodes}};
}

JobStatus Manager::job_status(const std::string& name) const {
  std::lock_guard lk(impl_->mu);
  return impl_->sched.job(name).status;
}

std::vector<JobEvent> Manager::take_events(double timeout) {
  std::unique_lock lk(impl_->mu);
  impl_->cv.wait_for(lk, std::chrono::duration<double>(timeout),
                     [&] { return !impl_->events.empty() || impl_->done; });
  std::vector<JobEvent> out(impl_->events.begin(), impl_->events.end());
  impl_->events.clear();
  return out;
}

void Manager::wait_all() {
  std::unique_lock lk(impl_->mu);
  impl_->cv.wait(lk, [&] { return impl_->sched.all_terminal() || impl_->done; });
}

SchedulerReport Manager::finish() {
  {
    std::lock_guard lk(impl_->mu);
    impl_->sched.close();
  }
  impl_->wake();
  {
    std::lock_guard jl(impl_->join_mu);
    if (impl_->loop_thread.joinable()) impl_->loop_thread.join();
  }
  std::lock_guard lk(impl_->mu);
  return impl_->sched.report();
}

bool Manager::finished() const {
  std::lock_guard lk(impl_->mu);
  return impl_->done;
}

double Manager::now() const { return impl_->now(); }
const fs::path& Manager::workdir() const { return impl_->opts.workdir; }
int Manager::total_cores() const { return impl_->sched.total_cores(); }

void write_report(const SchedulerReport& r, const fs::path& file) {
  write_file_atomic(file, r.to_json().dump(2) + "\n");
}

}  // namespace vvuq::pilotjob
