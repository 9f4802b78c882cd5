#include "proact/mdp.hpp"

#include <charconv>

#include "proact/errors.hpp"
#include "proact/text.hpp"

namespace proact {

std::string_view to_string(ActionKind k) noexcept {
  switch (k) {
    case ActionKind::Query: return "query";
    case ActionKind::Search: return "search";
    case ActionKind::Answer: return "answer";
  }
  return "query";
}

std::optional<ActionKind> action_kind_from_string(std::string_view s) noexcept {
  if (s == "query") return ActionKind::Query;
  if (s == "search") return ActionKind::Search;
  if (s == "answer") return ActionKind::Answer;
  return std::nullopt;
}

std::optional<ActionKind> action_kind_from_choice(std::string_view choice) noexcept {
  if (choice == "action") return ActionKind::Query;
  if (choice == "search") return ActionKind::Search;
  if (choice == "answer") return ActionKind::Answer;
  return std::nullopt;
}

std::string_view to_choice(ActionKind k) noexcept {
  switch (k) {
    case ActionKind::Query: return "action";
    case ActionKind::Search: return "search";
    case ActionKind::Answer: return "answer";
  }
  return "action";
}

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::Success: return "success";
    case Termination::BudgetExhausted: return "budget_exhausted";
    case Termination::AgentStop: return "agent_stop";
  }
  return "budget_exhausted";
}

std::optional<Termination> termination_from_string(std::string_view s) noexcept {
  if (s == "success") return Termination::Success;
  if (s == "budget_exhausted") return Termination::BudgetExhausted;
  if (s == "agent_stop") return Termination::AgentStop;
  return std::nullopt;
}

int user_action_count(const Trajectory& traj) noexcept {
  int n = 0;
  for (const auto& t : traj.turns) n += is_user_involved(t.action.kind) ? 1 : 0;
  return n;
}

int env_action_count(const Trajectory& traj) noexcept {
  return static_cast<int>(traj.turns.size()) - user_action_count(traj);
}

double raw_return(const Trajectory& traj) noexcept {
  double r = 0.0;
  for (const auto& t : traj.turns) r += t.raw_reward;
  return r;
}

double shaped_return(const Trajectory& traj) noexcept {
  double r = 0.0;
  for (const auto& t : traj.turns) r += t.shaped_reward;
  return r;
}

double moo_objective(const Trajectory& traj, double w) {
  if (!(w >= 0.0)) throw std::invalid_argument("moo_objective: weight must be >= 0");
  return raw_return(traj) - w * user_action_count(traj);
}

std::string make_task_id(std::string_view env_name, std::uint64_t seed) {
  return std::string(env_name) + "/" + std::to_string(seed);
}

std::string Environment::task_id() const { return make_task_id(name(), seed_); }

std::optional<TaskRef> parse_task_id(std::string_view task_id) {
  const auto slash = task_id.find('/');
  if (slash == std::string_view::npos || slash == 0) return std::nullopt;
  TaskRef ref;
  ref.env = std::string(task_id.substr(0, slash));
  const auto digits = task_id.substr(slash + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), ref.seed);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty()) {
    return std::nullopt;
  }
  return ref;
}

Episode::Episode(Environment& env, const EpisodeConfig& cfg) : env_(env) {
  if (cfg.budget_T <= 0) throw std::invalid_argument("budget_T must be positive");
  initial_observation_ = env_.reset(cfg.seed);
  traj_.task_id = env_.task_id();
  traj_.context_digest = text::hex64(env_.context_hash());
  traj_.budget_T = cfg.budget_T;
  traj_.terminated_by = Termination::BudgetExhausted;
}

StepOutcome Episode::step(const ActionRecord& action) {
  if (done_) throw EpisodeDone();
  Turn turn;
  turn.index = this->turn() + 1;
  turn.action = action;
  bool success = false;
  if (!action.well_formed()) {
    turn.observation = std::string(kInvalidActionObservation);
  } else {
    StepResult r = env_.step(action);
    turn.observation = std::move(r.observation);
    turn.raw_reward = r.reward;
    success = r.success;
  }
  turn.shaped_reward = turn.raw_reward;
  traj_.turns.push_back(turn);

  if (success) {
    done_ = true;
    traj_.terminated_by = Termination::Success;
  } else if (this->turn() >= traj_.budget_T) {
    done_ = true;
    traj_.terminated_by = Termination::BudgetExhausted;
  }
  const Turn& last = traj_.turns.back();
  return {last.observation, last.raw_reward, done_, this->turn(), remaining_budget()};
}

void Episode::stop() {
  if (done_) return;
  if (traj_.turns.empty()) {
    step(ActionRecord{ActionKind::Query, ""});
    if (done_) return;
  }
  done_ = true;
  traj_.terminated_by = Termination::AgentStop;
}

Trajectory run_episode(Environment& env, Agent& agent, const EpisodeConfig& cfg) {
  Episode episode(env, cfg);
  agent.begin(env.name(), episode.initial_observation(), cfg.budget_T);
  while (!episode.done()) {
    auto action = agent.act(episode.turns());
    if (!action) {
      episode.stop();
      break;
    }
    episode.step(*action);
  }
  return episode.trajectory();
}

}  // namespace proact
