#pragma once

// Line-delimited JSON wire protocol. Requests:
//   {"cmd":"reset","task_id":"function/7"}
//   {"cmd":"step","choice":"action"|"search"|"answer","content":"..."}
//   {"cmd":"close"}
// Responses: {observation, reward, done, turn, remaining_budget} (reset adds
// session_id) or {error, message} with error one of bad_request, no_session,
// episode_done, parse_error.

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "proact/mdp.hpp"
#include "proact/shaping.hpp"
#include "proact/suite.hpp"

namespace proact::server {

/// Append-only JSONL log shared by all sessions.
class TrajectorySink {
 public:
  explicit TrajectorySink(std::ostream* out) : out_(out) {}
  void append(const Trajectory& traj);
  void flush();
  std::size_t count() const;

 private:
  mutable std::mutex mu_;
  std::ostream* out_;
  std::size_t count_ = 0;
};

struct SessionOptions {
  EnvSuite suite;
  ShapingConfig shaping = ShapingConfig::disabled();
  int budget_T = 0;  // 0: the environment's default
};

nlohmann::ordered_json error_response(std::string_view code, std::string_view message);

class ProtocolSession {
 public:
  ProtocolSession(SessionOptions opts, TrajectorySink* sink, std::string session_id);

  /// One request line in, one response line out (no trailing newline).
  std::string handle_line(std::string_view line);
  nlohmann::ordered_json handle(const nlohmann::json& request);

  bool closed() const noexcept { return closed_; }
  const std::string& session_id() const noexcept { return session_id_; }

 private:
  nlohmann::ordered_json reset(const nlohmann::json& request);
  nlohmann::ordered_json step(const nlohmann::json& request);

  SessionOptions opts_;
  TrajectorySink* sink_;
  std::string session_id_;
  std::unique_ptr<Environment> env_;
  std::unique_ptr<Episode> episode_;
  bool logged_ = false;
  bool closed_ = false;
};

/// Serves a single session over a pair of streams until EOF or close.
void serve_stream(std::istream& in, std::ostream& out, const SessionOptions& opts, TrajectorySink* sink);

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 7777;  // 0 picks a free port
};

/// TCP server, one thread per connection.
class Server {
 public:
  Server(ServerConfig cfg, SessionOptions opts, TrajectorySink* sink);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and listens; returns the bound port. Throws Error.
  int bind();
  /// Accepts connections until stop(); joins every connection thread.
  void run();
  void stop() noexcept { stopping_ = true; }

 private:
  void serve_connection(int fd, std::string session_id);

  ServerConfig cfg_;
  SessionOptions opts_;
  TrajectorySink* sink_;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::mutex threads_mu_;
  std::vector<std::thread> threads_;
  std::uint64_t next_session_ = 1;
};

}  // namespace proact::server
