#pragma once

// Environment suite: the parameters that, together with a task id, fully
// determine an episode's hidden context.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "proact/env_function.hpp"
#include "proact/env_telepathy.hpp"
#include "proact/env_turtle.hpp"

namespace proact {

struct EnvSuite {
  int function_max_depth = function_gym::kDefaultMaxDepth;
  std::shared_ptr<const telepathy::EntityKB> kb;
  std::shared_ptr<const turtle::StoryPack> stories;
  turtle::JudgeMode judge = turtle::JudgeMode::Strict;

  /// Default KB (seed 0) and the shipped story pack.
  static EnvSuite defaults();

  /// Throws std::invalid_argument for unknown names.
  std::unique_ptr<Environment> make(std::string_view env_name) const;
};

inline const std::vector<std::string>& env_names() {
  static const std::vector<std::string> names = {"function", "telepathy", "turtle"};
  return names;
}

int default_budget(std::string_view env_name);

}  // namespace proact
