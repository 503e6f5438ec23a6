#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vvuq/pilotjob/scheduler.hpp"

namespace vvuq::pilotjob {

struct ManagerOptions {
  Allocation allocation;
  std::filesystem::path workdir;  // empty: current directory
  double kill_grace = 5.0;        // seconds between SIGTERM and SIGKILL on cancel
};

struct JobEvent {
  std::string name;
  JobStatus status = JobStatus::QUEUED;
  std::optional<int> exit_code;  // of the last task that ran
};

/// Wall-clock pilot-job manager. A loop thread owns child processes; every
/// public call is applied atomically under one lock.
class Manager {
 public:
  explicit Manager(ManagerOptions opts);
  ~Manager();
  Manager(const Manager&) = delete;
  Manager& operator=(const Manager&) = delete;

  /// Throws ValidationError; nothing is queued unless the whole batch is valid.
  std::vector<std::string> submit(std::vector<JobSpec> specs);
  /// Throws NotFound or AlreadyTerminal.
  void cancel(const std::string& name);

  nlohmann::json status(const std::optional<std::string>& name = std::nullopt) const;
  nlohmann::json resources() const;
  JobStatus job_status(const std::string& name) const;

  /// Jobs that became terminal since the last call; waits up to `timeout`
  /// seconds for at least one.
  std::vector<JobEvent> take_events(double timeout);
  /// Blocks until every submitted job is terminal.
  void wait_all();
  /// Refuses new submissions, drains running tasks and returns the report.
  SchedulerReport finish();
  bool finished() const;

  double now() const;
  const std::filesystem::path& workdir() const;
  int total_cores() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Writes the report JSON; default name pj-report.json.
void write_report(const SchedulerReport& r, const std::filesystem::path& file);

inline constexpr const char* kReportFile = "pj-report.json";

}  // namespace vvuq::pilotjob
