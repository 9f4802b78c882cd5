#include "proact/suite.hpp"

#include <stdexcept>

namespace proact {

EnvSuite EnvSuite::defaults() {
  EnvSuite s;
  s.kb = std::make_shared<const telepathy::EntityKB>(telepathy::build_default_kb(0));
  s.stories = std::make_shared<const turtle::StoryPack>(turtle::default_stories());
  return s;
}

std::unique_ptr<Environment> EnvSuite::make(std::string_view env_name) const {
  if (env_name == "function") return std::make_unique<function_gym::FunctionGym>(function_max_depth);
  if (env_name == "telepathy") return std::make_unique<telepathy::TelepathyGym>(kb);
  if (env_name == "turtle") return std::make_unique<turtle::TurtleGym>(stories, judge);
  throw std::invalid_argument("unknown environment '" + std::string(env_name) + "'");
}

int default_budget(std::string_view env_name) {
  if (env_name == "function") return function_gym::kFunctionBudget;
  if (env_name == "telepathy") return telepathy::kTelepathyBudget;
  if (env_name == "turtle") return turtle::kTurtleBudget;
  throw std::invalid_argument("unknown environment '" + std::string(env_name) + "'");
}

}  // namespace proact
