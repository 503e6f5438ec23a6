#include "vvuq/pilotjob/scheduler.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

#include "vvuq/core/errors.hpp"

namespace vvuq::pilotjob {

using nlohmann::json;

namespace {

bool valid_job_name(const std::string& n) {
  if (n.empty()) return false;
  for (char c : n)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == ':')) return false;
  return true;
}

}  // namespace

Scheduler::Scheduler(Allocation allocation) : alloc_(std::move(allocation)) {
  validate(alloc_);
  total_ = alloc_.total_cores();
  for (const auto& n : alloc_.nodes) node_free_.push_back(n.cores);
}

const JobState& Scheduler::job(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw NotFound("no job named '" + name + "'");
  return jobs_[it->second];
}

std::vector<std::string> Scheduler::submit(std::vector<JobSpec> specs, double now) {
  if (closed_) throw ValidationError("manager is finishing and accepts no new jobs");
  std::map<std::string, std::size_t> batch;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    if (!valid_job_name(s.name)) throw ValidationError("invalid job name '" + s.name + "'");
    if (by_name_.count(s.name) || !batch.emplace(s.name, i).second)
      throw ValidationError("duplicate job name '" + s.name + "'");
    if (s.command.empty()) throw ValidationError("job '" + s.name + "' has an empty command");
    if (s.cores < 1) throw ValidationError("job '" + s.name + "' needs at least one core");
    if (s.cores > total_)
      throw ValidationError("job '" + s.name + "' needs " + std::to_string(s.cores) + " cores but the allocation has " +
                            std::to_string(total_));
    if (s.iterations < 1) throw ValidationError("job '" + s.name + "' needs at least one iteration");
    if (s.duration && !(*s.duration >= 0.0)) throw ValidationError("job '" + s.name + "' has a negative duration");
  }
  for (const auto& s : specs)
    for (const auto& d : s.after) {
      if (d == s.name) throw ValidationError("job '" + s.name + "' depends on itself");
      if (!by_name_.count(d) && !batch.count(d))
        throw ValidationError("job '" + s.name + "' depends on unknown job '" + d + "'");
    }
  // cycles can only run through jobs of this batch
  std::vector<int> mark(specs.size(), 0);
  std::function<void(std::size_t)> visit = [&](std::size_t i) {
    if (mark[i] == 2) return;
    if (mark[i] == 1) throw ValidationError("dependency cycle through job '" + specs[i].name + "'");
    mark[i] = 1;
    for (const auto& d : specs[i].after)
      if (auto it = batch.find(d); it != batch.end()) visit(it->second);
    mark[i] = 2;
  };
  for (std::size_t i = 0; i < specs.size(); ++i) visit(i);

  const std::size_t base = jobs_.size();
  std::vector<std::string> names;
  for (auto& s : specs) {
    JobState j;
    j.spec = std::move(s);
    j.submit = now;
    j.tasks.resize(static_cast<std::size_t>(j.spec.iterations));
    by_name_[j.spec.name] = jobs_.size();
    names.push_back(j.spec.name);
    jobs_.push_back(std::move(j));
  }
  for (std::size_t i = base; i < jobs_.size(); ++i) {
    for (const auto& d : jobs_[i].spec.after) {
      const std::size_t di = by_name_.at(d);
      jobs_[i].deps.push_back(di);
      jobs_[di].dependents.push_back(i);
    }
    for (int k = 0; k < jobs_[i].spec.iterations; ++k) queue_.push_back(TaskRef{i, k});
  }
  for (std::size_t i = base; i < jobs_.size(); ++i) {
    if (jobs_[i].status != JobStatus::QUEUED) continue;
    for (auto d : jobs_[i].deps) {
      const auto st = jobs_[d].status;
      if (st == JobStatus::FAILED || st == JobStatus::CANCELED || st == JobStatus::OMITTED) {
        drop_queued(i, JobStatus::OMITTED, now);
        set_status(i, JobStatus::OMITTED);
        omit_dependents(i, now);
        break;
      }
    }
  }
  return names;
}

bool Scheduler::eligible(const TaskRef& t) const {
  const auto& j = jobs_[t.job];
  if (j.verdict) return false;
  for (auto d : j.deps)
    if (jobs_[d].status != JobStatus::SUCCEEDED) return false;
  if (!j.spec.parallel_iterations && t.iteration > 0 &&
      j.tasks[static_cast<std::size_t>(t.iteration - 1)].status != JobStatus::SUCCEEDED)
    return false;
  return true;
}

std::optional<double> Scheduler::expected_end(const TaskRef& t) const {
  const auto& j = jobs_[t.job];
  if (!j.spec.duration) return std::nullopt;
  return j.tasks[static_cast<std::size_t>(t.iteration)].start + *j.spec.duration;
}

void Scheduler::start(const TaskRef& t, double now, std::vector<Dispatch>& out) {
  auto& j = jobs_[t.job];
  auto& task = j.tasks[static_cast<std::size_t>(t.iteration)];
  int need = j.spec.cores;
  Placement p;
  for (std::size_t n = 0; n < node_free_.size() && need > 0; ++n) {
    const int take = std::min(need, node_free_[n]);
    if (take > 0) {
      node_free_[n] -= take;
      need -= take;
      p.emplace_back(n, take);
    }
  }
  if (need != 0) throw std::logic_error("scheduler placed a task without enough free cores");
  busy_ += j.spec.cores;
  if (busy_ > total_) throw std::logic_error("scheduler exceeded the allocation");
  task.status = JobStatus::EXECUTING;
  task.start = now;
  task.placement = p;
  j.status = JobStatus::EXECUTING;
  ++j.executing;
  running_.push_back(t);
  util_.emplace_back(now, busy_);
  out.push_back(Dispatch{t, std::move(p)});
}

std::vector<Dispatch> Scheduler::schedule(double now) {
  std::vector<Dispatch> out;
  if (free_cores() == 0) return out;

  bool head_blocked = false;
  std::optional<double> shadow;  // reserved start of the blocked head
  int extra = 0;                 // cores free at the shadow time beyond the head's need

  for (auto it = queue_.begin(); it != queue_.end() && free_cores() > 0;) {
    const TaskRef t = *it;
    if (!eligible(t)) {
      ++it;
      continue;
    }
    const auto& spec = jobs_[t.job].spec;
    const int need = spec.cores;
    if (!head_blocked) {
      if (need <= free_cores()) {
        it = queue_.erase(it);
        start(t, now, out);
        continue;
      }
      head_blocked = true;
      std::vector<std::pair<double, int>> ends;
      bool known = true;
      for (const auto& r : running_) {
        auto e = expected_end(r);
        if (!e) {
          known = false;
          break;
        }
        ends.emplace_back(std::max(*e, now), jobs_[r.job].spec.cores);
      }
      if (known) {
        std::sort(ends.begin(), ends.end());
        int avail = free_cores();
        for (const auto& [when, cores] : ends) {
          avail += cores;
          if (avail >= need) {
            shadow = when;
            extra = avail - need;
            break;
          }
        }
      }
      ++it;
      continue;
    }
    if (need > free_cores()) {
      ++it;
      continue;
    }
    bool ok = true;
    if (shadow) {
      if (spec.duration && now + *spec.duration <= *shadow) {
        ok = true;
      } else if (need <= extra) {
        extra -= need;
      } else {
        ok = false;
      }
    }
    if (ok) {
      it = queue_.erase(it);
      start(t, now, out);
    } else {
      ++it;
    }
  }
  return out;
}

void Scheduler::drop_queued(std::size_t job, JobStatus as, double now) {
  auto& j = jobs_[job];
  for (auto& task : j.tasks)
    if (task.status == JobStatus::QUEUED) {
      task.status = as;
      task.end = now;
    }
  queue_.remove_if([job](const TaskRef& t) { return t.job == job; });
}

void Scheduler::omit_dependents(std::size_t job, double now) {
  for (auto d : jobs_[job].dependents) {
    auto& dj = jobs_[d];
    if (is_terminal(dj.status)) continue;
    drop_queued(d, JobStatus::OMITTED, now);
    set_status(d, JobStatus::OMITTED);
    omit_dependents(d, now);
  }
}

void Scheduler::finalize(std::size_t job, double now) {
  auto& j = jobs_[job];
  if (j.executing > 0) return;
  if (j.verdict) {
    set_status(job, *j.verdict);
    omit_dependents(job, now);
  } else if (j.succeeded == j.spec.iterations) {
    set_status(job, JobStatus::SUCCEEDED);
  }
}

void Scheduler::set_status(std::size_t job, JobStatus s) {
  jobs_[job].status = s;
  if (is_terminal(s)) terminal_log_.push_back(job);
}

void Scheduler::task_finished(TaskRef t, int exit_code, double now) {
  auto& j = jobs_.at(t.job);
  auto& task = j.tasks.at(static_cast<std::size_t>(t.iteration));
  if (task.status != JobStatus::EXECUTING) throw std::logic_error("finished a task that was not executing");
  for (const auto& [node, cores] : task.placement) node_free_[node] += cores;
  busy_ -= j.spec.cores;
  running_.erase(std::find(running_.begin(), running_.end(), t));
  util_.emplace_back(now, busy_);
  task.end = now;
  task.exit_code = exit_code;
  --j.executing;
  if (j.verdict == JobStatus::CANCELED) {
    task.status = JobStatus::CANCELED;
  } else if (exit_code == 0) {
    task.status = JobStatus::SUCCEEDED;
    ++j.succeeded;
  } else {
    task.status = JobStatus::FAILED;
    if (!j.verdict) {
      j.verdict = JobStatus::FAILED;
      drop_queued(t.job, JobStatus::OMITTED, now);
    }
  }
  finalize(t.job, now);
}

std::vector<TaskRef> Scheduler::cancel(const std::string& name, double now) {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw NotFound("no job named '" + name + "'");
  const std::size_t ji = it->second;
  auto& j = jobs_[ji];
  if (is_terminal(j.status) || j.verdict) throw AlreadyTerminal("job '" + name + "' is already " + to_string(j.status));
  j.verdict = JobStatus::CANCELED;
  drop_queued(ji, JobStatus::CANCELED, now);
  std::vector<TaskRef> kill;
  for (const auto& r : running_)
    if (r.job == ji) kill.push_back(r);
  finalize(ji, now);
  return kill;
}

bool Scheduler::all_terminal() const {
  if (!running_.empty()) return false;
  for (const auto& j : jobs_)
    if (!is_terminal(j.status)) return false;
  return true;
}

std::map<std::string, std::size_t> Scheduler::counts() const {
  std::map<std::string, std::size_t> c;
  for (auto s : {JobStatus::QUEUED, JobStatus::EXECUTING, JobStatus::SUCCEEDED, JobStatus::FAILED,
                 JobStatus::CANCELED, JobStatus::OMITTED})
    c[to_string(s)] = 0;
  for (const auto& j : jobs_) ++c[to_string(j.status)];
  return c;
}

SchedulerReport Scheduler::report() const {
  SchedulerReport r;
  r.total_cores = total_;
  r.utilization = util_;
  r.counts = counts();
  double first_submit = 0.0, last_end = 0.0, work = 0.0;
  bool any = false;
  for (const auto& j : jobs_) {
    for (std::size_t k = 0; k < j.tasks.size(); ++k) {
      const auto& t = j.tasks[k];
      r.tasks.push_back(TaskRecord{j.spec.name, static_cast<int>(k), t.status, j.submit, t.start, t.end, j.spec.cores,
                                   t.exit_code});
      if (t.start >= 0.0 && t.end >= 0.0) {
        work += j.spec.cores * (t.end - t.start);
        first_submit = any ? std::min(first_submit, j.submit) : j.submit;
        last_end = any ? std::max(last_end, t.end) : t.end;
        any = true;
      }
    }
  }
  if (!any) return r;
  r.makespan = last_end - first_submit;

  // critical path over measured runtimes; jobs are stored in a dependency-respecting order
  std::vector<double> finish(jobs_.size(), 0.0);
  double cp = 0.0;
  for (std::size_t i = 0; i < jobs_.size(); ++i) {
    double ready = 0.0;
    for (auto d : jobs_[i].deps) ready = std::max(ready, finish[d]);
    double own = 0.0;
    for (const auto& t : jobs_[i].tasks) {
      if (t.start < 0.0 || t.end < 0.0) continue;
      const double run = t.end - t.start;
      own = jobs_[i].spec.parallel_iterations ? std::max(own, run) : own + run;
    }
    finish[i] = ready + own;
    cp = std::max(cp, finish[i]);
  }
  r.ideal = std::max(work / total_, cp);
  r.overhead = std::max(0.0, r.makespan - r.ideal);
  return r;
}

json SchedulerReport::to_json() const {
  json tasks_json = json::array();
  for (const auto& t : tasks) {
    json o{{"job", t.job}, {"iteration", t.iteration}, {"status", to_string(t.status)}, {"cores", t.cores},
           {"submit", t.submit}};
    if (t.start >= 0.0) {
      o["start"] = t.start;
      o["wait"] = t.start - t.submit;
    }
    if (t.end >= 0.0) o["end"] = t.end;
    if (t.start >= 0.0 && t.end >= 0.0) o["run"] = t.end - t.start;
    if (t.exit_code) o["exit_code"] = *t.exit_code;
    tasks_json.push_back(std::move(o));
  }
  json util = json::array();
  for (const auto& [t, b] : utilization) util.push_back({t, b});
  return {{"makespan", makespan},
          {"ideal", ideal},
          {"overhead", overhead},
          {"overhead_fraction", ideal > 0.0 ? overhead / ideal : 0.0},
          {"total_cores", total_cores},
          {"jobs", counts},
          {"tasks", tasks_json},
          {"utilization", util}};
}

}  // namespace vvuq::pilotjob
