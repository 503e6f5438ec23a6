#pragma once

#include <cstddef>
#include <list>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vvuq/pilotjob/job.hpp"

namespace vvuq::pilotjob {

struct TaskRef {
  std::size_t job = 0;
  int iteration = 0;
  friend bool operator==(const TaskRef&, const TaskRef&) = default;
};

/// Cores taken on each node, as (node index, cores).
using Placement = std::vector<std::pair<std::size_t, int>>;

struct Dispatch {
  TaskRef task;
  Placement placement;
};

struct TaskState {
  JobStatus status = JobStatus::QUEUED;
  double start = -1.0;
  double end = -1.0;
  std::optional<int> exit_code;
  Placement placement;
};

struct JobState {
  JobSpec spec;
  JobStatus status = JobStatus::QUEUED;
  double submit = 0.0;
  std::vector<TaskState> tasks;
  std::vector<std::size_t> deps;
  std::vector<std::size_t> dependents;
  int executing = 0;
  int succeeded = 0;
  std::optional<JobStatus> verdict;  // FAILED or CANCELED, applied once nothing executes
};

struct TaskRecord {
  std::string job;
  int iteration = 0;
  JobStatus status = JobStatus::QUEUED;
  double submit = 0.0;
  double start = -1.0;
  double end = -1.0;
  int cores = 0;
  std::optional<int> exit_code;
};

struct SchedulerReport {
  double makespan = 0.0;
  double ideal = 0.0;     // max(work / cores, critical path), from measured runtimes
  double overhead = 0.0;  // makespan - ideal, never negative
  int total_cores = 0;
  std::vector<TaskRecord> tasks;
  std::vector<std::pair<double, int>> utilization;  // (time, busy cores) after each change
  std::map<std::string, std::size_t> counts;        // job status -> jobs

  nlohmann::json to_json() const;
};

/// Scheduling authority with no notion of real time: callers pass `now`.
/// FIFO over eligible tasks with backfill. When the queue head does not fit
/// and every running task has a declared duration, later tasks may only
/// backfill if they end before the head's reserved start or use cores the
/// head will not need (EASY); otherwise any task that fits backfills.
class Scheduler {
 public:
  explicit Scheduler(Allocation allocation);

  const Allocation& allocation() const { return alloc_; }
  int total_cores() const { return total_; }
  int busy_cores() const { return busy_; }
  int free_cores() const { return total_ - busy_; }
  std::vector<int> node_free() const { return node_free_; }

  /// Validates the whole batch, then queues it. Throws ValidationError.
  std::vector<std::string> submit(std::vector<JobSpec> specs, double now);
  /// Stops accepting submissions.
  void close() { closed_ = true; }
  bool closed() const { return closed_; }

  /// Starts whatever the policy allows at `now`.
  std::vector<Dispatch> schedule(double now);
  void task_finished(TaskRef t, int exit_code, double now);
  /// Cancels a job. Queued tasks become CANCELED at once; the returned tasks
  /// are executing and must be terminated by the caller, then reported via
  /// task_finished. Throws NotFound or AlreadyTerminal.
  std::vector<TaskRef> cancel(const std::string& name, double now);

  bool all_terminal() const;
  std::size_t job_count() const { return jobs_.size(); }
  const JobState& job(std::size_t i) const { return jobs_.at(i); }
  const JobState& job(const std::string& name) const;
  const std::vector<std::pair<double, int>>& utilization() const { return util_; }
  std::map<std::string, std::size_t> counts() const;

  SchedulerReport report() const;

  /// Jobs that became terminal since the last call, in order.
  std::vector<std::size_t> take_terminal() { return std::exchange(terminal_log_, {}); }

 private:
  void set_status(std::size_t job, JobStatus s);
  bool eligible(const TaskRef& t) const;
  std::optional<double> expected_end(const TaskRef& t) const;
  void start(const TaskRef& t, double now, std::vector<Dispatch>& out);
  void finalize(std::size_t job, double now);
  void omit_dependents(std::size_t job, double now);
  void drop_queued(std::size_t job, JobStatus as, double now);

  Allocation alloc_;
  int total_ = 0;
  int busy_ = 0;
  std::vector<int> node_free_;
  std::vector<JobState> jobs_;
  std::map<std::string, std::size_t> by_name_;
  std::list<TaskRef> queue_;
  std::vector<TaskRef> running_;
  std::vector<std::pair<double, int>> util_;
  bool closed_ = false;
  std::vector<std::size_t> terminal_log_;
};

}  // namespace vvuq::pilotjob
