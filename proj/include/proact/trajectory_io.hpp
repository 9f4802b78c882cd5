#pragma once

// JSONL trajectory format. Field order is fixed so that replays compare
// byte for byte:
//   {task_id, context_digest, budget_T, terminated_by,
//    turns:[{index, kind, content, observation, raw_reward, shaped_reward}]}

#include <iosfwd>
#include <string>
#include <vector>

#include "proact/mdp.hpp"

namespace proact {

/// One line, no trailing newline.
std::string to_jsonl(const Trajectory& traj);

/// Throws ParseError on malformed input.
Trajectory from_jsonl(const std::string& line);

void write_jsonl(std::ostream& os, const std::vector<Trajectory>& trajs);
std::vector<Trajectory> read_jsonl(std::istream& is);

/// Checks |turns| in [1, budget_T] and contiguous 1-based indices.
bool well_formed(const Trajectory& traj);

}  // namespace proact
