#pragma once

// Turn-level behavior regularization. Penalties only ever subtract from
// shaped_reward; raw_reward is never touched.

#include "proact/mdp.hpp"

namespace proact {

struct ShapingConfig {
  double lambda_ans = 0.1;
  double lambda_think = 0.1;

  static ShapingConfig disabled() { return {0.0, 0.0}; }
  /// Throws std::invalid_argument unless both are finite and >= 0.
  void validate() const;
};

/// r_t -= lambda_ans for every turn t >= 2 where a_t and a_{t-1} are both
/// user-involved.
Trajectory apply_info_seeking_penalty(Trajectory traj, const ShapingConfig& cfg);

/// If the episode failed after T' < T turns, every turn pays
/// lambda_think * (T - T') / T'.
Trajectory apply_overthinking_penalty(Trajectory traj, const ShapingConfig& cfg, int budget_T);

/// Resets shaped rewards to raw, then applies info-seeking followed by
/// over-thinking.
Trajectory shape(Trajectory traj, const ShapingConfig& cfg, int budget_T);
inline Trajectory shape(Trajectory traj, const ShapingConfig& cfg) {
  const int budget = traj.budget_T;
  return shape(std::move(traj), cfg, budget);
}

}  // namespace proact
