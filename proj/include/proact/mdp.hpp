#pragma once

// Finite-horizon contextual MDP shared by all environments: the partitioned
// action space, per-turn records, trajectories and the episode driver.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace proact {

/// Query and Search touch only the environment (A_e); Answer involves the
/// user (A_u).
enum class ActionKind { Query, Search, Answer };

constexpr bool is_user_involved(ActionKind k) noexcept { return k == ActionKind::Answer; }
constexpr bool is_env_involved(ActionKind k) noexcept { return !is_user_involved(k); }

std::string_view to_string(ActionKind k) noexcept;
std::optional<ActionKind> action_kind_from_string(std::string_view s) noexcept;

/// Maps the tool-schema choice vocabulary {action, answer, search}.
std::optional<ActionKind> action_kind_from_choice(std::string_view choice) noexcept;
std::string_view to_choice(ActionKind k) noexcept;

struct ActionRecord {
  ActionKind kind = ActionKind::Query;
  std::string content;

  bool well_formed() const noexcept { return !content.empty(); }
  friend bool operator==(const ActionRecord&, const ActionRecord&) = default;
};

inline ActionRecord query(std::string content) { return {ActionKind::Query, std::move(content)}; }
inline ActionRecord search(std::string content = "search") {
  return {ActionKind::Search, std::move(content)};
}
inline ActionRecord answer(std::string content) { return {ActionKind::Answer, std::move(content)}; }

struct Turn {
  int index = 1;
  ActionRecord action;
  std::string observation;
  double raw_reward = 0.0;
  double shaped_reward = 0.0;

  friend bool operator==(const Turn&, const Turn&) = default;
};

enum class Termination { Success, BudgetExhausted, AgentStop };

std::string_view to_string(Termination t) noexcept;
std::optional<Termination> termination_from_string(std::string_view s) noexcept;

struct Trajectory {
  std::string task_id;
  std::string context_digest;
  int budget_T = 0;
  Termination terminated_by = Termination::BudgetExhausted;
  std::vector<Turn> turns;

  std::size_t size() const noexcept { return turns.size(); }
  bool succeeded() const noexcept { return terminated_by == Termination::Success; }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct EpisodeConfig {
  int budget_T = 15;
  std::uint64_t seed = 0;
};

/// U(tau): number of Answer turns.
int user_action_count(const Trajectory& traj) noexcept;
int env_action_count(const Trajectory& traj) noexcept;

/// R(tau): plain sum of raw rewards.
double raw_return(const Trajectory& traj) noexcept;
double shaped_return(const Trajectory& traj) noexcept;

/// R(tau) - w * U(tau).
double moo_objective(const Trajectory& traj, double w);

struct StepResult {
  std::string observation;
  double reward = 0.0;
  /// The environment signals terminal success.
  bool success = false;
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view name() const = 0;
  virtual int default_budget() const = 0;

  /// Samples the hidden context from `seed` and returns the opening
  /// observation shown to the agent.
  virtual std::string reset(std::uint64_t seed) = 0;
  virtual StepResult step(const ActionRecord& action) = 0;

  /// Stable hash of the hidden context; never the context itself.
  virtual std::uint64_t context_hash() const = 0;

  std::uint64_t seed() const noexcept { return seed_; }
  std::string task_id() const;

 protected:
  std::uint64_t seed_ = 0;
};

std::string make_task_id(std::string_view env_name, std::uint64_t seed);

struct TaskRef {
  std::string env;
  std::uint64_t seed = 0;
};
std::optional<TaskRef> parse_task_id(std::string_view task_id);

/// Agents are per-episode state machines.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual void begin(std::string_view env_name, std::string_view initial_observation,
                     int budget_T) = 0;

  /// Next action given every turn played so far; nullopt stops the episode.
  virtual std::optional<ActionRecord> act(std::span<const Turn> history) = 0;
};

struct StepOutcome {
  std::string observation;
  double reward = 0.0;
  bool done = false;
  int turn = 0;
  int remaining_budget = 0;
};

inline constexpr std::string_view kInvalidActionObservation = "invalid action";

/// Drives one episode: enforces the turn budget, records turns, and turns
/// malformed actions into zero-reward turns.
class Episode {
 public:
  Episode(Environment& env, const EpisodeConfig& cfg);

  const std::string& initial_observation() const noexcept { return initial_observation_; }

  /// Throws EpisodeDone after termination.
  StepOutcome step(const ActionRecord& action);

  /// The agent declines to act. Before the first turn this is recorded as an
  /// invalid action so the trajectory is never empty.
  void stop();

  bool done() const noexcept { return done_; }
  int turn() const noexcept { return static_cast<int>(traj_.turns.size()); }
  int remaining_budget() const noexcept { return traj_.budget_T - turn(); }
  const Trajectory& trajectory() const noexcept { return traj_; }
  std::span<const Turn> turns() const noexcept { return traj_.turns; }

 private:
  Environment& env_;
  Trajectory traj_;
  std::string initial_observation_;
  bool done_ = false;
};

/// Runs a full episode. Resets the environment with cfg.seed.
Trajectory run_episode(Environment& env, Agent& agent, const EpisodeConfig& cfg);

}  // namespace proact
