#include "vvuq/pilotjob/service.hpp"

#include <poll.h>
#include <sys/eventfd.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>
#include <vector>

#include "vvuq/core/errors.hpp"

namespace vvuq::pilotjob {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

sockaddr_un make_addr(const fs::path& p) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  const std::string s = p.string();
  if (s.size() >= sizeof addr.sun_path)
    throw BindError("socket path too long (" + std::to_string(s.size()) + " bytes): " + s);
  std::memcpy(addr.sun_path, s.c_str(), s.size() + 1);
  return addr;
}

bool write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

// Reads one line (without '\n') into `line`; false on EOF or error.
bool read_line(int fd, std::string& buf, std::string& line) {
  for (;;) {
    const auto nl = buf.find('\n');
    if (nl != std::string::npos) {
      line = buf.substr(0, nl);
      buf.erase(0, nl + 1);
      return true;
    }
    char chunk[4096];
    const ssize_t n = ::read(fd, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    buf.append(chunk, static_cast<std::size_t>(n));
  }
}

json failure(const json& id, const std::string& code, const std::string& message) {
  return {{"id", id}, {"ok", false}, {"error", {{"code", code}, {"message", message}}}};
}

}  // namespace

struct Server::Impl {
  Manager& mgr;
  fs::path path;
  int listen_fd = -1;
  int stop_fd = -1;
  std::atomic<bool> stopping{false};
  mutable std::mutex mu;
  std::optional<SchedulerReport> report;
  std::vector<std::thread> clients;
  std::vector<int> client_fds;

  Impl(Manager& m, fs::path p) : mgr(m), path(std::move(p)) {}
};

Server::Server(Manager& manager, fs::path socket_path) : impl_(std::make_unique<Impl>(manager, std::move(socket_path))) {
  auto addr = make_addr(impl_->path);
  if (fs::exists(impl_->path)) {
    // a live listener means another manager owns the path
    const int probe = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
    const bool live = probe >= 0 && ::connect(probe, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0;
    if (probe >= 0) ::close(probe);
    if (live) throw BindError("another manager is listening on " + impl_->path.string());
    fs::remove(impl_->path);
  }
  impl_->listen_fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (impl_->listen_fd < 0) throw BindError(std::string("socket: ") + std::strerror(errno));
  if (::bind(impl_->listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(impl_->listen_fd, 128) != 0) {
    const int e = errno;
    ::close(impl_->listen_fd);
    throw BindError("cannot listen on " + impl_->path.string() + ": " + std::strerror(e));
  }
  impl_->stop_fd = eventfd(0, EFD_CLOEXEC | EFD_NONBLOCK);
}

Server::~Server() {
  stop();
  for (auto& t : impl_->clients)
    if (t.joinable()) t.join();
  if (impl_->listen_fd >= 0) ::close(impl_->listen_fd);
  if (impl_->stop_fd >= 0) ::close(impl_->stop_fd);
  std::error_code ec;
  fs::remove(impl_->path, ec);
}

const fs::path& Server::path() const { return impl_->path; }

void Server::stop() {
  impl_->stopping = true;
  const std::uint64_t one = 1;
  [[maybe_unused]] auto n = ::write(impl_->stop_fd, &one, sizeof one);
  std::lock_guard lk(impl_->mu);
  for (int fd : impl_->client_fds) ::shutdown(fd, SHUT_RDWR);
}

std::optional<SchedulerReport> Server::report() const {
  std::lock_guard lk(impl_->mu);
  return impl_->report;
}

json Server::handle(const json& req) {
  const json id = req.is_object() && req.contains("id") ? req.at("id") : json(nullptr);
  if (!req.is_object() || !req.contains("cmd") || !req.at("cmd").is_string())
    return failure(id, "parse-error", "request needs a string 'cmd'");
  const std::string cmd = req.at("cmd").get<std::string>();
  const json payload = req.value("payload", json::object());
  try {
    json data;
    if (cmd == "submit") {
      std::vector<JobSpec> specs;
      if (payload.is_object() && payload.contains("jobs")) {
        if (!payload.at("jobs").is_array()) throw ParseError("'jobs' must be an array");
        for (const auto& j : payload.at("jobs")) specs.push_back(job_from_json(j));
      } else {
        specs.push_back(job_from_json(payload));
      }
      data = {{"names", impl_->mgr.submit(std::move(specs))}};
    } else if (cmd == "status") {
      std::optional<std::string> name;
      if (payload.is_object() && payload.contains("name")) name = payload.at("name").get<std::string>();
      data = impl_->mgr.status(name);
    } else if (cmd == "cancel") {
      if (!payload.is_object() || !payload.contains("name") || !payload.at("name").is_string())
        throw ParseError("cancel needs a 'name'");
      impl_->mgr.cancel(payload.at("name").get<std::string>());
      data = {{"name", payload.at("name")}};
    } else if (cmd == "resources") {
      data = impl_->mgr.resources();
    } else if (cmd == "finish") {
      auto r = impl_->mgr.finish();
      data = r.to_json();
      std::lock_guard lk(impl_->mu);
      impl_->report = std::move(r);
    } else {
      return failure(id, "unknown-command", "unknown command '" + cmd + "'");
    }
    return {{"id", id}, {"ok", true}, {"data", data}};
  } catch (const Error& e) {
    return failure(id, e.code(), e.what());
  } catch (const json::exception& e) {
    return failure(id, "parse-error", e.what());
  } catch (const std::exception& e) {
    return failure(id, "internal-error", e.what());
  }
}

json Server::handle_line(const std::string& line) {
  json req;
  try {
    req = json::parse(line);
  } catch (const json::exception& e) {
    return failure(nullptr, "parse-error", e.what());
  }
  return handle(req);
}

void Server::serve() {
  auto client_loop = [this](int fd) {
    std::string buf, line;
    while (!impl_->stopping && read_line(fd, buf, line)) {
      if (line.empty()) continue;
      const json reply = handle_line(line);
      if (!write_all(fd, reply.dump() + "\n")) break;
      if (report()) {
        // finished: stop accepting once the reply is out
        impl_->stopping = true;
        const std::uint64_t one = 1;
        [[maybe_unused]] auto n = ::write(impl_->stop_fd, &one, sizeof one);
      }
    }
  };

  while (!impl_->stopping) {
    pollfd fds[2] = {{impl_->listen_fd, POLLIN, 0}, {impl_->stop_fd, POLLIN, 0}};
    if (::poll(fds, 2, -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (fds[1].revents) break;
    if (!(fds[0].revents & POLLIN)) continue;
    const int fd = ::accept4(impl_->listen_fd, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;
    std::lock_guard lk(impl_->mu);
    impl_->client_fds.push_back(fd);
    impl_->clients.emplace_back([client_loop, fd] { client_loop(fd); });
  }
  impl_->stopping = true;
  {
    std::lock_guard lk(impl_->mu);
    for (int fd : impl_->client_fds) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : impl_->clients)
    if (t.joinable()) t.join();
  std::lock_guard lk(impl_->mu);
  for (int fd : impl_->client_fds) ::close(fd);
  impl_->client_fds.clear();
  impl_->clients.clear();
}

Client::Client(const fs::path& socket_path) {
  auto addr = make_addr(socket_path);
  fd_ = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0 || ::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const int e = errno;
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
    throw IoError("cannot connect to " + socket_path.string() + ": " + std::strerror(e));
  }
}

Client::~Client() {
  if (fd_ >= 0) ::close(fd_);
}

json Client::exchange(const std::string& line) {
  if (!write_all(fd_, line + "\n")) throw IoError("connection to the manager was lost");
  std::string reply;
  if (!read_line(fd_, buf_, reply)) throw IoError("manager closed the connection");
  return json::parse(reply);
}

json Client::call(const std::string& cmd, const json& payload) {
  const long long id = next_id_++;
  const json reply = exchange(json{{"id", id}, {"cmd", cmd}, {"payload", payload}}.dump());
  if (!reply.value("ok", false)) {
    const auto& err = reply.at("error");
    throw Error(err.value("code", "error"), err.value("message", "request failed"));
  }
  return reply.value("data", json(nullptr));
}

}  // namespace vvuq::pilotjob
