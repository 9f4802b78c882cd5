#include "proact/trajectory_io.hpp"

#include <cmath>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>

#include "proact/errors.hpp"

namespace proact {

using ojson = nlohmann::ordered_json;

std::string to_jsonl(const Trajectory& traj) {
  ojson j;
  j["task_id"] = traj.task_id;
  j["context_digest"] = traj.context_digest;
  j["budget_T"] = traj.budget_T;
  j["terminated_by"] = std::string(to_string(traj.terminated_by));
  ojson turns = ojson::array();
  for (const auto& t : traj.turns) {
    ojson tj;
    tj["index"] = t.index;
    tj["kind"] = std::string(to_string(t.action.kind));
    tj["content"] = t.action.content;
    tj["observation"] = t.observation;
    tj["raw_reward"] = t.raw_reward;
    tj["shaped_reward"] = t.shaped_reward;
    turns.push_back(std::move(tj));
  }
  j["turns"] = std::move(turns);
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

Trajectory from_jsonl(const std::string& line) {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("trajectory line is not JSON: ") + e.what());
  }
  try {
    Trajectory traj;
    traj.task_id = j.at("task_id").get<std::string>();
    traj.context_digest = j.at("context_digest").get<std::string>();
    traj.budget_T = j.at("budget_T").get<int>();
    auto term = termination_from_string(j.at("terminated_by").get<std::string>());
    if (!term) throw ParseError("unknown terminated_by value");
    traj.terminated_by = *term;
    for (const auto& tj : j.at("turns")) {
      Turn t;
      t.index = tj.at("index").get<int>();
      auto kind = action_kind_from_string(tj.at("kind").get<std::string>());
      if (!kind) throw ParseError("unknown action kind");
      t.action.kind = *kind;
      t.action.content = tj.at("content").get<std::string>();
      t.observation = tj.at("observation").get<std::string>();
      t.raw_reward = tj.at("raw_reward").get<double>();
      t.shaped_reward = tj.at("shaped_reward").get<double>();
      traj.turns.push_back(std::move(t));
    }
    return traj;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed trajectory: ") + e.what());
  }
}

void write_jsonl(std::ostream& os, const std::vector<Trajectory>& trajs) {
  for (const auto& t : trajs) os << to_jsonl(t) << '\n';
}

std::vector<Trajectory> read_jsonl(std::istream& is) {
  std::vector<Trajectory> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    out.push_back(from_jsonl(line));
  }
  return out;
}

bool well_formed(const Trajectory& traj) {
  if (traj.budget_T <= 0) return false;
  if (traj.turns.empty() || static_cast<int>(traj.turns.size()) > traj.budget_T) return false;
  for (std::size_t i = 0; i < traj.turns.size(); ++i) {
    if (traj.turns[i].index != static_cast<int>(i) + 1) return false;
    if (!std::isfinite(traj.turns[i].raw_reward)) return false;
  }
  return true;
}

}  // namespace proact
