#include "proact/shaping.hpp"

#include <cmath>
#include <stdexcept>

namespace proact {

void ShapingConfig::validate() const {
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!ok(lambda_ans) || !ok(lambda_think)) {
    throw std::invalid_argument("shaping coefficients must be finite and non-negative");
  }
}

Trajectory apply_info_seeking_penalty(Trajectory traj, const ShapingConfig& cfg) {
  for (std::size_t t = 1; t < traj.turns.size(); ++t) {
    if (is_user_involved(traj.turns[t].action.kind) &&
        is_user_involved(traj.turns[t - 1].action.kind)) {
      traj.turns[t].shaped_reward -= cfg.lambda_ans;
    }
  }
  return traj;
}

Trajectory apply_overthinking_penalty(Trajectory traj, const ShapingConfig& cfg, int budget_T) {
  const int used = static_cast<int>(traj.turns.size());
  if (traj.succeeded() || used == 0 || used >= budget_T) return traj;
  const double penalty = cfg.lambda_think * static_cast<double>(budget_T - used) / used;
  for (auto& t : traj.turns) t.shaped_reward -= penalty;
  return traj;
}

Trajectory shape(Trajectory traj, const ShapingConfig& cfg, int budget_T) {
  cfg.validate();
  for (auto& t : traj.turns) t.shaped_reward = t.raw_reward;
  return apply_overthinking_penalty(apply_info_seeking_penalty(std::move(traj), cfg), cfg, budget_T);
}

}  // namespace proact
