#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "vvuq/pilotjob/manager.hpp"

namespace vvuq::pilotjob {

/// Newline-delimited JSON over a Unix stream socket. Requests are
/// {id, cmd, payload}; each gets exactly one {id, ok, data|error} reply.
class Server {
 public:
  /// Binds the socket. Throws BindError if the path is unusable or another
  /// manager is listening on it.
  Server(Manager& manager, std::filesystem::path socket_path);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Accepts clients until a finish request has been answered, or stop().
  void serve();
  void stop();
  /// The report produced by a finish request, if one arrived.
  std::optional<SchedulerReport> report() const;

  /// Applies one request; never throws.
  nlohmann::json handle(const nlohmann::json& request);
  nlohmann::json handle_line(const std::string& line);

  const std::filesystem::path& path() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class Client {
 public:
  /// Throws IoError when nothing listens on the socket.
  explicit Client(const std::filesystem::path& socket_path);
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  /// Sends a request and returns `data`; a failed reply is rethrown as
  /// vvuq::Error carrying the remote code.
  nlohmann::json call(const std::string& cmd, const nlohmann::json& payload = nlohmann::json::object());
  /// Sends one raw line and returns the parsed reply.
  nlohmann::json exchange(const std::string& line);

 private:
  int fd_ = -1;
  std::string buf_;
  long long next_id_ = 1;
};

}  // namespace vvuq::pilotjob
