#include "vvuq/campaign/run_protocol.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "vvuq/core/errors.hpp"
#include "vvuq/core/process.hpp"

namespace vvuq::campaign {

namespace fs = std::filesystem;

namespace {

class RunLock {
 public:
  explicit RunLock(const fs::path& run_dir) {
    const auto p = run_dir / kLockFile;
    fd_ = ::open(p.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open " + p.string() + ": " + std::strerror(errno));
    while (::flock(fd_, LOCK_EX) != 0) {
      if (errno != EINTR) {
        ::close(fd_);
        throw IoError("cannot lock " + p.string() + ": " + std::strerror(errno));
      }
    }
  }
  ~RunLock() { ::close(fd_); }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  int fd_ = -1;
};

std::optional<int> read_int_file(const fs::path& p) {
  std::ifstream in(p);
  long long v = 0;
  if (in >> v) return static_cast<int>(v);
  return std::nullopt;
}

}  // namespace

void prepare_submission(const fs::path& run_dir, int attempt, const std::string& output_relpath) {
  std::error_code ec;
  fs::remove(run_dir / kExitFile, ec);
  if (!output_relpath.empty()) fs::remove(run_dir / output_relpath, ec);
  write_file_atomic(run_dir / kAttemptFile, std::to_string(attempt) + "\n");
}

std::optional<int> read_exit_marker(const fs::path& run_dir, int attempt) {
  std::ifstream in(run_dir / kExitFile);
  long long a = 0, code = 0;
  if (in >> a >> code && a == attempt) return static_cast<int>(code);
  return std::nullopt;
}

int run_shim(const fs::path& run_dir, int attempt, const std::vector<std::string>& argv) {
  RunLock lock(run_dir);
  if (read_int_file(run_dir / kAttemptFile) != attempt) return kStaleAttempt;
  if (auto done = read_exit_marker(run_dir, attempt)) return *done;

  SpawnOptions opts;
  opts.argv = argv;
  opts.cwd = run_dir;
  opts.new_process_group = false;
  int code = 0;
  try {
    code = wait_process(spawn_process(opts));
  } catch (const IoError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    code = 127;
  }
  write_file_atomic(run_dir / kExitFile, std::to_string(attempt) + " " + std::to_string(code) + "\n");
  return code;
}

std::optional<int> reconcile_run(const fs::path& run_dir, int attempt) {
  if (!fs::exists(run_dir)) return std::nullopt;
  RunLock lock(run_dir);
  if (auto code = read_exit_marker(run_dir, attempt)) return code;
  // The attempt never ran; fence it so a shim still waiting to start gives up.
  write_file_atomic(run_dir / kAttemptFile, std::to_string(attempt + 1) + "\n");
  return std::nullopt;
}

}  // namespace vvuq::campaign
