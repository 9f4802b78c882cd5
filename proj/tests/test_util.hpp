#pragma once

#include <string>
#include <vector>

#include "proact/env_function.hpp"
#include "proact/mdp.hpp"

namespace proact::testing {

inline Trajectory make_traj(const std::vector<ActionKind>& kinds, const std::vector<double>& raw,
                            Termination term = Termination::BudgetExhausted, int budget_T = 15) {
  Trajectory t;
  t.task_id = "function/0";
  t.context_digest = "0000000000000000";
  t.budget_T = budget_T;
  t.terminated_by = term;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    Turn turn;
    turn.index = static_cast<int>(i) + 1;
    turn.action = {kinds[i], "x"};
    turn.observation = "obs";
    turn.raw_reward = i < raw.size() ? raw[i] : 0.0;
    turn.shaped_reward = turn.raw_reward;
    t.turns.push_back(turn);
  }
  return t;
}

/// f = ((x2 + x3) ^ 2) / x1 * x4 with test input (1, 2, 3, 4).
inline function_gym::FunctionContext reference_context() {
  using function_gym::ExprTree;
  using function_gym::Op;
  auto sum = ExprTree::binary(Op::Add, ExprTree::var(2), ExprTree::var(3));
  auto sq = ExprTree::binary(Op::Pow, sum, ExprTree::constant(2));
  auto quo = ExprTree::binary(Op::Div, sq, ExprTree::var(1));
  auto f = ExprTree::binary(Op::Mul, quo, ExprTree::var(4));
  return {f, {1, 2, 3, 4}, function_gym::kFunctionBudget};
}

/// Plays a fixed action list.
class ScriptAgent final : public Agent {
 public:
  explicit ScriptAgent(std::vector<ActionRecord> script) : script_(std::move(script)) {}
  void begin(std::string_view, std::string_view, int) override {}
  std::optional<ActionRecord> act(std::span<const Turn> history) override {
    if (history.size() < script_.size()) return script_[history.size()];
    return script_.empty() ? std::nullopt : std::optional(script_.back());
  }

 private:
  std::vector<ActionRecord> script_;
};

}  // namespace proact::testing
