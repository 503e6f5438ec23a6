#pragma once

#include <sys/types.h>

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vvuq {

struct SpawnOptions {
  std::vector<std::string> argv;  // argv[0] is looked up on PATH unless it has a '/'
  std::filesystem::path cwd;      // empty: inherit
  std::optional<std::filesystem::path> stdout_path;
  std::optional<std::filesystem::path> stderr_path;
  std::map<std::string, std::string> env;  // added to / overriding the inherited environment
  bool new_process_group = true;
};

/// Starts a child process. Throws IoError if it cannot be started.
pid_t spawn_process(const SpawnOptions& opts);

/// Exit code of a finished child: its status, or 128 + signal number.
int decode_wait_status(int status);

/// Blocking wait for one child.
int wait_process(pid_t pid);

/// Pollable descriptor that becomes readable when `pid` exits (-1 if the
/// kernel lacks pidfd support).
int open_pidfd(pid_t pid);

struct CaptureResult {
  int exit_code = 0;
  std::string out;
  std::string err;
};

/// Runs a command to completion capturing stdout and stderr.
CaptureResult run_capture(const std::vector<std::string>& argv, const std::filesystem::path& cwd = {});

/// Directory holding the running executable.
std::filesystem::path self_exe_dir();
std::filesystem::path self_exe();

/// Prepends `dir` to PATH of this process (inherited by children).
void prepend_path(const std::filesystem::path& dir);

/// Atomic small-file write: temp file, fsync, rename.
void write_file_atomic(const std::filesystem::path& file, const std::string& content);

}  // namespace vvuq
