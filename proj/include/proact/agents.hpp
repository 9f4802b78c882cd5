#pragma once

// Agents: a naive guesser, scripted behavioral agents (memory management,
// hypothesis refinement, dynamic scheduling, strategic querying), a replay
// agent, and the trainable softmax policy with per-environment adapters.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "proact/env_function.hpp"
#include "proact/env_telepathy.hpp"
#include "proact/env_turtle.hpp"
#include "proact/mdp.hpp"
#include "proact/policy.hpp"
#include "proact/rng.hpp"
#include "proact/suite.hpp"

namespace proact::agents {

/// Turns held back for answering once the budget runs low.
inline constexpr int kReserveTurns = 2;

/// [1, t/T, #A_e/T, #A_u/T, hypothesis_unique, last_answer_wrong], with t
/// the number of turns already played.
FeatureVector make_features(std::span<const Turn> history, int budget_T, bool hypothesis_unique);

// ---------------------------------------------------------------------------
// Function-Gym memory

class FunctionMemory {
 public:
  explicit FunctionMemory(int max_depth);

  /// Consumes turns not seen yet.
  void update(std::span<const Turn> history);

  const std::optional<function_gym::Input>& test_input() const noexcept { return test_input_; }
  bool built() const noexcept { return built_; }
  const std::vector<function_gym::ExprTree>& hypotheses() const noexcept { return hypotheses_; }
  const std::vector<function_gym::Probe>& probes() const noexcept { return probes_; }
  const std::set<std::string>& asked() const noexcept { return asked_; }
  int probes_done() const noexcept { return static_cast<int>(probes_.size()); }
  int rebuilds() const noexcept { return rebuilds_; }

  /// Every remaining hypothesis gives the same value at the test input.
  bool unique() const;
  /// Most common hypothesis value at the test input.
  std::optional<double> best_answer() const;

  /// Next canonical probe not asked yet and distinct from the test input.
  std::optional<function_gym::Input> next_canonical() const;
  function_gym::Input random_probe(Rng& rng) const;
  /// Probe minimizing the number of hypotheses that would still be answered
  /// wrongly afterwards; nullopt when no candidate improves on asking nothing.
  std::optional<function_gym::Input> informative_probe(Rng& rng) const;

 private:
  void add_probe(const function_gym::Probe& p);
  void rebuild();
  void refresh_values();
  bool usable(const function_gym::Input& x) const;

  int max_depth_;
  std::size_t seen_ = 0;
  std::optional<function_gym::Input> test_input_;
  std::vector<function_gym::Probe> probes_;
  std::vector<double> rejected_;
  std::set<std::string> asked_;
  bool built_ = false;
  std::vector<function_gym::ExprTree> hypotheses_;
  std::vector<double> test_values_;  // parallel to hypotheses_ once the test input is known
  int rebuilds_ = 0;
};

// ---------------------------------------------------------------------------
// Telepathy-Gym memory

class TelepathyMemory {
 public:
  explicit TelepathyMemory(std::shared_ptr<const telepathy::EntityKB> kb);

  void update(std::span<const Turn> history);

  const std::vector<std::size_t>& candidates() const noexcept { return candidates_; }
  const std::set<std::string>& asked() const noexcept { return asked_; }
  const std::map<std::string, bool>& facts() const noexcept { return facts_; }
  bool unique() const noexcept { return candidates_.size() == 1; }
  int rebuilds() const noexcept { return rebuilds_; }

  /// Tag minimizing the worst-case number of further questions.
  std::optional<std::string> best_split_tag() const;
  std::optional<std::string> random_unasked_tag(Rng& rng) const;
  const telepathy::Entity* best_candidate() const;
  const telepathy::EntityKB& kb() const noexcept { return *kb_; }

 private:
  void recompute();

  std::shared_ptr<const telepathy::EntityKB> kb_;
  std::size_t seen_ = 0;
  std::map<std::string, bool> facts_;
  std::set<std::string> asked_;
  std::set<std::string> guessed_;
  std::vector<std::size_t> candidates_;
  int rebuilds_ = 0;
};

// ---------------------------------------------------------------------------
// Turtle-Gym memory. The story's qa predicates serve as reasoning axes; the
// replies are only ever learned from the environment.

class TurtleMemory {
 public:
  explicit TurtleMemory(std::shared_ptr<const turtle::StoryPack> stories);

  void begin(std::string_view surface);
  void update(std::span<const Turn> history);

  std::size_t axis_count() const noexcept { return axes_.size(); }
  std::string question(std::size_t axis) const;
  std::optional<std::size_t> next_axis() const;
  std::optional<std::size_t> random_axis(Rng& rng) const;
  const std::vector<std::string>& confirmed() const noexcept { return confirmed_; }
  int new_since_answer() const noexcept { return new_since_answer_; }
  /// Answer built from every confirmed stem; empty when nothing is confirmed.
  std::string compose_answer() const;
  bool pending() const;
  bool exhausted() const { return !next_axis().has_value(); }
  const std::vector<std::set<std::string>>& axes() const noexcept { return axes_; }

 private:
  std::shared_ptr<const turtle::StoryPack> stories_;
  std::vector<std::set<std::string>> axes_;
  std::set<std::size_t> asked_;
  std::vector<std::string> confirmed_;
  std::set<std::string> rejected_;
  std::string last_submitted_;
  int new_since_answer_ = 0;
  std::size_t seen_ = 0;
};

// ---------------------------------------------------------------------------
// Scripted agents

class NaiveFunctionAgent final : public Agent {
 public:
  NaiveFunctionAgent(int max_depth, std::uint64_t seed);
  void begin(std::string_view, std::string_view, int budget_T) override;
  std::optional<ActionRecord> act(std::span<const Turn> history) override;

 private:
  int max_depth_;
  Rng rng_;
  std::optional<function_gym::Input> test_input_;
  std::vector<double> guesses_;  // values of the hypotheses fitting the single probe
};

class BehavioralFunctionAgent final : public Agent {
 public:
  BehavioralFunctionAgent(int max_depth, std::uint64_t seed);
  void begin(std::string_view, std::string_view, int budget_T) override;
  std::optional<ActionRecord> act(std::span<const Turn> history) override;
  const FunctionMemory& memory() const noexcept { return memory_; }

 private:
  int max_depth_;
  std::uint64_t seed_;
  Rng rng_;
  FunctionMemory memory_;
  int budget_ = function_gym::kFunctionBudget;
};

class NaiveTelepathyAgent final : public Agent {
 public:
  NaiveTelepathyAgent(std::shared_ptr<const telepathy::EntityKB> kb, std::uint64_t seed);
  void begin(std::string_view, std::string_view, int budget_T) override;
  std::optional<ActionRecord> act(std::span<const Turn> history) override;

 private:
  std::shared_ptr<const telepathy::EntityKB> kb_;
  Rng rng_;
};

class BehavioralTelepathyAgent final : public Agent {
 public:
  BehavioralTelepathyAgent(std::shared_ptr<const telepathy::EntityKB> kb, std::uint64_t seed);
  void begin(std::string_view, std::string_view, int budget_T) override;
  std::optional<ActionRecord> act(std::span<const Turn> history) override;
  const TelepathyMemory& memory() const noexcept { return memory_; }

 private:
  std::shared_ptr<const telepathy::EntityKB> kb_;
  Rng rng_;
  TelepathyMemory memory_;
  int budget_ = telepathy::kTelepathyBudget;
};

class NaiveTurtleAgent final : public Agent {
 public:
  NaiveTurtleAgent(std::shared_ptr<const turtle::StoryPack> stories, std::uint64_t seed);
  void begin(std::string_view, std::string_view surface, int budget_T) override;
  std::optional<ActionRecord> act(std::span<const Turn> history) override;

 private:
  TurtleMemory memory_;
  Rng rng_;
};

class BehavioralTurtleAgent final : public Agent {
 public:
  BehavioralTurtleAgent(std::shared_ptr<const turtle::StoryPack> stories, std::uint64_t seed);
  void begin(std::string_view, std::string_view surface, int budget_T) override;
  std::optional<ActionRecord> act(std::span<const Turn> history) override;
  const TurtleMemory& memory() const noexcept { return memory_; }

 private:
  TurtleMemory memory_;
  int budget_ = turtle::kTurtleBudget;
};

/// Submits one keyword per turn without asking anything. A lenient judge that
/// accepts a single matching stem pays it well; a strict judge does not.
class KeywordTurtleAgent final : public Agent {
 public:
  explicit KeywordTurtleAgent(std::shared_ptr<const turtle::StoryPack> stories);
  void begin(std::string_view, std::string_view surface, int budget_T) override;
  std::optional<ActionRecord> act(std::span<const Turn> history) override;

 private:
  TurtleMemory memory_;
  std::vector<std::string> keywords_;
};

/// Replays a recorded action list, then stops.
class ReplayAgent final : public Agent {
 public:
  explicit ReplayAgent(std::vector<ActionRecord> actions) : actions_(std::move(actions)) {}
  void begin(std::string_view, std::string_view, int) override {}
  std::optional<ActionRecord> act(std::span<const Turn> history) override;

 private:
  std::vector<ActionRecord> actions_;
};

// ---------------------------------------------------------------------------
// Trainable policy

/// Maps the K policy templates to concrete actions for one environment.
class PolicyAdapter {
 public:
  virtual ~PolicyAdapter() = default;
  virtual void begin(std::string_view initial_observation, int budget_T) = 0;
  virtual void update(std::span<const Turn> history) = 0;
  virtual bool hypothesis_unique() const = 0;
  virtual ActionRecord render(int template_index, Rng& rng) = 0;
  virtual std::vector<std::string> template_names() const = 0;
};

std::unique_ptr<PolicyAdapter> make_adapter(std::string_view env_name, const EnvSuite& suite);

struct Decision {
  FeatureVector features;
  int template_index = 0;
  double logprob = 0.0;
};

class PolicyAgent final : public Agent {
 public:
  PolicyAgent(std::shared_ptr<const PolicyParams> theta, std::unique_ptr<PolicyAdapter> adapter,
              std::uint64_t seed);
  void begin(std::string_view env_name, std::string_view initial_observation, int budget_T) override;
  std::optional<ActionRecord> act(std::span<const Turn> history) override;

  /// One entry per turn played by this agent.
  const std::vector<Decision>& decisions() const noexcept { return decisions_; }

 private:
  std::shared_ptr<const PolicyParams> theta_;
  std::unique_ptr<PolicyAdapter> adapter_;
  Rng rng_;
  int budget_ = 0;
  std::vector<Decision> decisions_;
};

inline const std::vector<std::string>& agent_names() {
  static const std::vector<std::string> names = {"naive", "behavioral", "trainable", "keyword"};
  return names;
}

/// Builds a fresh agent for one episode. `trainable` uses `theta` (zeros when
/// null); `keyword` exists for Turtle-Gym only.
std::unique_ptr<Agent> make_agent(std::string_view agent_name, std::string_view env_name,
                                  const EnvSuite& suite, std::uint64_t seed,
                                  std::shared_ptr<const PolicyParams> theta = nullptr);

}  // namespace proact::agents
