#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vvuq/campaign/store.hpp"
#include "vvuq/pilotjob/scheduler.hpp"

namespace vvuq::driver {

enum class ExecutorKind { serial, local_pool, pilotjob };

std::string to_string(ExecutorKind k);
/// "serial", "local-pool" or "pilotjob"; ConfigError otherwise.
ExecutorKind parse_executor(const std::string& s);

struct RunPlan {
  ExecutorKind executor = ExecutorKind::serial;
  int workers = 1;           // local-pool
  int allocation_cores = 0;  // pilotjob; 0 uses the detected cores
  int cores_per_run = 1;
  int retry_limit = 0;       // extra attempts per run after a failure
  bool auto_collate = true;
  /// Program that implements the `run-shim` subcommand; empty: this executable.
  std::filesystem::path shim;
  /// pilotjob socket; empty: <workdir>/pj.sock, or a temp path when too long.
  std::filesystem::path socket_path;
};

struct RunSummary {
  std::size_t launched = 0;
  std::size_t completed = 0;
  std::size_t failed = 0;  // failures, including ones later retried
  std::size_t retried = 0;
  std::size_t collated = 0;
  std::size_t reconciled = 0;  // SUBMITTED runs left by an earlier driver
  std::vector<std::int64_t> failed_runs;  // still FAILED at the end
  std::vector<std::string> collate_errors;
  bool interrupted = false;
  std::optional<pilotjob::SchedulerReport> report;
};

using Logger = std::function<void(const std::string&)>;

/// Validates the plan (ConfigError).
void validate(const RunPlan& plan);

/// Executes every NEW/ENCODED run. Each run goes through the run-directory
/// protocol: armed, marked SUBMITTED, then started by the shim, so a driver
/// killed at any point can be resumed without re-running finished work.
/// Setting `*stop` stops new launches; in-flight runs are still committed.
RunSummary run_campaign(campaign::Store& store, const RunPlan& plan, const std::atomic<bool>* stop = nullptr,
                        const Logger& log = {});

/// Decodes every COMPLETED run. Decode failures leave the run COMPLETED and
/// are returned as messages.
std::size_t collate(campaign::Store& store, std::vector<std::string>* errors = nullptr);

}  // namespace vvuq::driver
