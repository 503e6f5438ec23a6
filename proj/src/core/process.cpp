#include "vvuq/core/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/syscall.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "vvuq/core/errors.hpp"

extern char** environ;

namespace vvuq {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> merged_environment(const std::map<std::string, std::string>& extra) {
  std::vector<std::string> env;
  for (char** e = environ; *e; ++e) {
    std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq != std::string::npos && extra.count(entry.substr(0, eq))) continue;
    env.push_back(std::move(entry));
  }
  for (const auto& [k, v] : extra) env.push_back(k + "=" + v);
  return env;
}

std::string errno_text(int err) { return std::strerror(err); }

}  // namespace

pid_t spawn_process(const SpawnOptions& opts) {
  if (opts.argv.empty()) throw IoError("cannot spawn an empty command");
  posix_spawn_file_actions_t fa;
  posix_spawnattr_t attr;
  posix_spawn_file_actions_init(&fa);
  posix_spawnattr_init(&attr);
  struct Guard {
    posix_spawn_file_actions_t* fa;
    posix_spawnattr_t* attr;
    ~Guard() {
      posix_spawn_file_actions_destroy(fa);
      posix_spawnattr_destroy(attr);
    }
  } guard{&fa, &attr};

  if (!opts.cwd.empty()) posix_spawn_file_actions_addchdir_np(&fa, opts.cwd.c_str());
  posix_spawn_file_actions_addopen(&fa, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  // Output paths are relative to the child's working directory.
  if (opts.stdout_path)
    posix_spawn_file_actions_addopen(&fa, STDOUT_FILENO, opts.stdout_path->c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (opts.stderr_path)
    posix_spawn_file_actions_addopen(&fa, STDERR_FILENO, opts.stderr_path->c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);

  short flags = POSIX_SPAWN_SETSIGMASK | POSIX_SPAWN_SETSIGDEF;
  sigset_t none, all;
  sigemptyset(&none);
  sigfillset(&all);
  posix_spawnattr_setsigmask(&attr, &none);
  posix_spawnattr_setsigdefault(&attr, &all);
  if (opts.new_process_group) {
    flags |= POSIX_SPAWN_SETPGROUP;
    posix_spawnattr_setpgroup(&attr, 0);
  }
  posix_spawnattr_setflags(&attr, flags);

  std::vector<char*> argv;
  for (const auto& a : opts.argv) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  auto env_strings = merged_environment(opts.env);
  std::vector<char*> envp;
  for (auto& e : env_strings) envp.push_back(e.data());
  envp.push_back(nullptr);

  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, argv[0], &fa, &attr, argv.data(), envp.data());
  if (rc != 0) throw IoError("cannot start '" + opts.argv[0] + "': " + errno_text(rc));
  return pid;
}

int decode_wait_status(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return 255;
}

int wait_process(pid_t pid) {
  int status = 0;
  while (waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw IoError("waitpid failed: " + errno_text(errno));
  }
  return decode_wait_status(status);
}

int open_pidfd(pid_t pid) {
#ifdef SYS_pidfd_open
  return static_cast<int>(syscall(SYS_pidfd_open, pid, 0));
#else
  (void)pid;
  return -1;
#endif
}

CaptureResult run_capture(const std::vector<std::string>& argv, const fs::path& cwd) {
  char out_tmpl[] = "/tmp/vvuq-out-XXXXXX";
  char err_tmpl[] = "/tmp/vvuq-err-XXXXXX";
  const int ofd = mkstemp(out_tmpl);
  const int efd = mkstemp(err_tmpl);
  if (ofd < 0 || efd < 0) throw IoError("cannot create capture files");
  close(ofd);
  close(efd);
  SpawnOptions opts;
  opts.argv = argv;
  opts.cwd = cwd;
  opts.stdout_path = fs::absolute(out_tmpl);
  opts.stderr_path = fs::absolute(err_tmpl);
  opts.new_process_group = false;
  CaptureResult r;
  try {
    r.exit_code = wait_process(spawn_process(opts));
  } catch (...) {
    unlink(out_tmpl);
    unlink(err_tmpl);
    throw;
  }
  auto slurp = [](const char* p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  r.out = slurp(out_tmpl);
  r.err = slurp(err_tmpl);
  unlink(out_tmpl);
  unlink(err_tmpl);
  return r;
}

fs::path self_exe() {
  std::error_code ec;
  auto p = fs::read_symlink("/proc/self/exe", ec);
  if (ec) throw IoError("cannot resolve /proc/self/exe");
  return p;
}

fs::path self_exe_dir() { return self_exe().parent_path(); }

void prepend_path(const fs::path& dir) {
  const char* old = std::getenv("PATH");
  std::string value = dir.string();
  if (old && *old) value += ":" + std::string(old);
  setenv("PATH", value.c_str(), 1);
}

void write_file_atomic(const fs::path& file, const std::string& content) {
  const fs::path tmp = file.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("cannot write " + tmp.string() + ": " + errno_text(errno));
  std::size_t off = 0;
  while (off < content.size()) {
    const ssize_t n = ::write(fd, content.data() + off, content.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int e = errno;
      ::close(fd);
      throw IoError("cannot write " + tmp.string() + ": " + errno_text(e));
    }
    off += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  if (::rename(tmp.c_str(), file.c_str()) != 0)
    throw IoError("cannot rename " + tmp.string() + ": " + errno_text(errno));
}

}  // namespace vvuq
