#pragma once

// Telepathy-Gym: identify a hidden entity with yes/no attribute questions.
// Attribute-set membership plays the simulated user.

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "proact/mdp.hpp"

namespace proact::telepathy {

struct Entity {
  std::string name;  // canonical lowercase
  std::set<std::string> attributes;
  friend bool operator==(const Entity&, const Entity&) = default;
};

struct EntityKB {
  std::vector<Entity> entities;
  std::set<std::string> vocabulary;

  const Entity* find(std::string_view canonical_name) const;
  friend bool operator==(const EntityKB&, const EntityKB&) = default;
};

inline constexpr int kTelepathyBudget = 12;
inline constexpr std::size_t kMinEntities = 16;

/// Throws std::invalid_argument describing the first violated invariant.
void validate(const EntityKB& kb);

/// Deterministic 16-entity KB. Even seeds draw from the animal pool, odd
/// seeds from the object pool, so seeds of opposite parity are disjoint.
EntityKB build_default_kb(std::uint64_t seed);

EntityKB kb_from_json(const std::string& json_text);
std::string kb_to_json(const EntityKB& kb);

/// First vocabulary tag (in sorted order) whose stem occurs among the
/// content words of `text`.
std::optional<std::string> match_attribute(const EntityKB& kb, std::string_view text);

/// Every vocabulary tag mentioned in `text`, plus the attributes of every KB
/// entity named in it.
std::set<std::string> mentioned_attributes(const EntityKB& kb, std::string_view text);

std::string question_for(std::string_view tag);

inline constexpr std::string_view kUnknownAttribute = "Unknown attribute";

class TelepathyGym final : public Environment {
 public:
  explicit TelepathyGym(std::shared_ptr<const EntityKB> kb);

  std::string_view name() const override { return "telepathy"; }
  int default_budget() const override { return kTelepathyBudget; }
  std::string reset(std::uint64_t seed) override;
  StepResult step(const ActionRecord& action) override;
  std::uint64_t context_hash() const override;

  const EntityKB& kb() const noexcept { return *kb_; }
  const Entity& target() const;
  void set_target(std::string_view name, std::uint64_t seed = 0);

  static std::string intro();

 private:
  std::shared_ptr<const EntityKB> kb_;
  std::size_t target_ = 0;
};

}  // namespace proact::telepathy
