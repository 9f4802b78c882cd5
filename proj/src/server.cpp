#include "proact/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>

#include "proact/errors.hpp"
#include "proact/trajectory_io.hpp"

namespace proact::server {

void TrajectorySink::append(const Trajectory& traj) {
  const std::string line = to_jsonl(traj);
  std::lock_guard lock(mu_);
  ++count_;
  if (out_ != nullptr) {
    *out_ << line << '\n';
    out_->flush();
  }
}

void TrajectorySink::flush() {
  std::lock_guard lock(mu_);
  if (out_ != nullptr) out_->flush();
}

std::size_t TrajectorySink::count() const {
  std::lock_guard lock(mu_);
  return count_;
}

nlohmann::ordered_json error_response(std::string_view code, std::string_view message) {
  nlohmann::ordered_json j;
  j["error"] = code;
  j["message"] = message;
  return j;
}

namespace {

nlohmann::ordered_json step_response(const std::string& observation, double reward, bool done, int turn,
                                     int remaining) {
  nlohmann::ordered_json j;
  j["observation"] = observation;
  j["reward"] = reward;
  j["done"] = done;
  j["turn"] = turn;
  j["remaining_budget"] = remaining;
  return j;
}

}  // namespace

ProtocolSession::ProtocolSession(SessionOptions opts, TrajectorySink* sink, std::string session_id)
    : opts_(std::move(opts)), sink_(sink), session_id_(std::move(session_id)) {}

std::string ProtocolSession::handle_line(std::string_view line) {
  nlohmann::json req;
  try {
    req = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    return error_response("parse_error", "request is not valid JSON").dump();
  }
  return handle(req).dump();
}

nlohmann::ordered_json ProtocolSession::handle(const nlohmann::json& req) {
  if (!req.is_object()) return error_response("bad_request", "request must be a JSON object");
  auto cmd = req.find("cmd");
  if (cmd == req.end() || !cmd->is_string()) return error_response("bad_request", "missing cmd");
  const auto& name = cmd->get_ref<const std::string&>();
  if (name == "reset") return reset(req);
  if (name == "step") return step(req);
  if (name == "close") {
    closed_ = true;
    const int turn = episode_ ? episode_->turn() : 0;
    const int remaining = episode_ ? episode_->remaining_budget() : 0;
    return step_response("closed", 0.0, true, turn, remaining);
  }
  return error_response("bad_request", "unknown cmd '" + name + "'");
}

nlohmann::ordered_json ProtocolSession::reset(const nlohmann::json& req) {
  auto tid = req.find("task_id");
  if (tid == req.end() || !tid->is_string()) return error_response("bad_request", "reset needs task_id");
  auto ref = parse_task_id(tid->get_ref<const std::string&>());
  if (!ref) return error_response("bad_request", "task_id must look like env/seed");
  std::unique_ptr<Environment> env;
  try {
    env = opts_.suite.make(ref->env);
  } catch (const std::invalid_argument& e) {
    return error_response("bad_request", e.what());
  }
  const int budget = opts_.budget_T > 0 ? opts_.budget_T : env->default_budget();
  episode_.reset();
  env_ = std::move(env);
  try {
    episode_ = std::make_unique<Episode>(*env_, EpisodeConfig{budget, ref->seed});
  } catch (const std::exception& e) {
    env_.reset();
    return error_response("bad_request", e.what());
  }
  logged_ = false;
  auto j = step_response(episode_->initial_observation(), 0.0, false, 0, episode_->remaining_budget());
  j["session_id"] = session_id_;
  return j;
}

nlohmann::ordered_json ProtocolSession::step(const nlohmann::json& req) {
  if (!episode_) return error_response("no_session", "reset a task before stepping");
  if (episode_->done()) return error_response("episode_done", "the episode has finished; reset to play again");
  auto choice = req.find("choice");
  if (choice == req.end() || !choice->is_string()) return error_response("bad_request", "step needs choice");
  auto kind = action_kind_from_choice(choice->get_ref<const std::string&>());
  if (!kind) return error_response("bad_request", "choice must be one of action, answer, search");
  std::string content;
  if (auto c = req.find("content"); c != req.end()) {
    if (!c->is_string()) return error_response("bad_request", "content must be a string");
    content = c->get<std::string>();
  }
  const StepOutcome out = episode_->step({*kind, std::move(content)});
  if (out.done && !logged_) {
    logged_ = true;
    if (sink_ != nullptr) {
      const Trajectory& t = episode_->trajectory();
      sink_->append(shape(t, opts_.shaping, t.budget_T));
    }
  }
  return step_response(out.observation, out.reward, out.done, out.turn, out.remaining_budget);
}

void serve_stream(std::istream& in, std::ostream& out, const SessionOptions& opts, TrajectorySink* sink) {
  ProtocolSession session(opts, sink, "stdio");
  std::string line;
  while (!session.closed() && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out << session.handle_line(line) << '\n';
    out.flush();
  }
}

// ---------------------------------------------------------------------------

Server::Server(ServerConfig cfg, SessionOptions opts, TrajectorySink* sink)
    : cfg_(std::move(cfg)), opts_(std::move(opts)), sink_(sink) {}

Server::~Server() {
  stop();
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(threads_mu_);
    threads.swap(threads_);
  }
  for (auto& t : threads) {
    if (t.joinable()) t.join();
  }
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

int Server::bind() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(cfg_.port));
  if (::inet_pton(AF_INET, cfg_.host.c_str(), &addr.sin_addr) != 1) {
    throw Error("bad bind address " + cfg_.host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    throw Error("bind " + cfg_.host + ":" + std::to_string(cfg_.port) + ": " + std::strerror(errno));
  }
  if (::listen(listen_fd_, 64) != 0) throw Error(std::string("listen: ") + std::strerror(errno));
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  return ntohs(addr.sin_port);
}

void Server::run() {
  if (listen_fd_ < 0) bind();
  while (!stopping_) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int r = ::poll(&p, 1, 100);
    if (r <= 0 || !(p.revents & POLLIN)) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    std::lock_guard lock(threads_mu_);
    threads_.emplace_back(&Server::serve_connection, this, fd, "s" + std::to_string(next_session_++));
  }
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(threads_mu_);
    threads.swap(threads_);
  }
  for (auto& t : threads) t.join();
  if (sink_ != nullptr) sink_->flush();
}

void Server::serve_connection(int fd, std::string session_id) {
  ProtocolSession session(opts_, sink_, std::move(session_id));
  std::string buf;
  char chunk[4096];
  auto send_all = [fd](const std::string& s) {
    std::size_t off = 0;
    while (off < s.size()) {
      const ssize_t n = ::send(fd, s.data() + off, s.size() - off, MSG_NOSIGNAL);
      if (n <= 0) return false;
      off += static_cast<std::size_t>(n);
    }
    return true;
  };
  bool alive = true;
  while (alive && !stopping_ && !session.closed()) {
    pollfd p{fd, POLLIN, 0};
    const int r = ::poll(&p, 1, 100);
    if (r == 0) continue;
    if (r < 0) break;
    const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n <= 0) break;
    buf.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    while (alive && !session.closed() && (nl = buf.find('\n')) != std::string::npos) {
      std::string line = buf.substr(0, nl);
      buf.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      alive = send_all(session.handle_line(line) + "\n");
    }
  }
  ::close(fd);
}

}  // namespace proact::server
