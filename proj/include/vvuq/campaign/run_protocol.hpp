#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vvuq::campaign {

// Files kept in each run directory so that a run executes at most once per
// attempt even if the driver dies while the simulation is still running.
//   .vvuq_lock     held (flock) by the shim for as long as the simulation runs
//   .vvuq_attempt  attempt number the next shim is allowed to execute
//   .vvuq_exit     "<attempt> <exit code>" written atomically when it ends
inline constexpr const char* kLockFile = ".vvuq_lock";
inline constexpr const char* kAttemptFile = ".vvuq_attempt";
inline constexpr const char* kExitFile = ".vvuq_exit";

/// Exit status of a shim that refused to run because its attempt was fenced.
inline constexpr int kStaleAttempt = 75;

/// Arms the run directory for `attempt`: clears the exit marker and any old
/// output, then writes the attempt file. Call before marking SUBMITTED.
void prepare_submission(const std::filesystem::path& run_dir, int attempt,
                        const std::string& output_relpath);

/// Shim body: takes the run lock, checks the attempt, runs `argv` in
/// `run_dir` and records its exit code. Returns that exit code.
int run_shim(const std::filesystem::path& run_dir, int attempt, const std::vector<std::string>& argv);

/// Outcome of a SUBMITTED run after a driver restart. Blocks while a shim
/// still holds the lock. Returns the recorded exit code, or nullopt if the
/// attempt never ran; in that case the attempt is fenced so a late shim
/// exits without running.
std::optional<int> reconcile_run(const std::filesystem::path& run_dir, int attempt);

/// Exit code recorded for `attempt`, if any, without locking.
std::optional<int> read_exit_marker(const std::filesystem::path& run_dir, int attempt);

}  // namespace vvuq::campaign
