#pragma once

// Turtle-Gym: uncover the hidden twist behind a short story. Answers are
// scored against a weighted rubric; each component pays out once.

#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "proact/mdp.hpp"

namespace proact::turtle {

struct RubricComponent {
  std::string id;
  double weight = 0.0;
  std::set<std::string> required_stems;
  bool covered = false;
};

enum class Reply { Yes, No, Maybe };
std::string_view to_string(Reply r) noexcept;

struct QaEntry {
  std::set<std::string> stems;
  Reply reply = Reply::Maybe;
};

struct TurtleStory {
  std::string title;
  std::string surface;
  std::string hidden_twist;
  std::vector<RubricComponent> rubric;
  std::vector<QaEntry> qa_table;
  int budget_T = 15;
};

using StoryPack = std::vector<TurtleStory>;

inline constexpr int kTurtleBudget = 15;

/// Strict requires every stem of a component; Leaky accepts any single stem.
enum class JudgeMode { Strict, Leaky };
std::string_view to_string(JudgeMode m) noexcept;

void validate(const TurtleStory& story);

/// The shipped stories, starting with "The Respected Cleaner".
const StoryPack& default_stories();

/// Accepts a single story object or an array of them:
/// {surface, rubric:[{id, weight, stems}], qa:[{stems, reply}]}.
StoryPack stories_from_json(const std::string& json_text);
std::string stories_to_json(const StoryPack& pack);

struct Judgement {
  std::vector<std::string> newly_covered;
  double score = 0.0;
};

/// Pure: scores `answer` against the components not yet covered.
Judgement judge_answer(std::string_view answer, std::span<const RubricComponent> rubric,
                       JudgeMode mode = JudgeMode::Strict);

/// qa_table entry with the largest stem overlap (first wins ties); Maybe
/// when nothing overlaps.
Reply lookup_reply(const TurtleStory& story, std::string_view question);

class TurtleGym final : public Environment {
 public:
  explicit TurtleGym(std::shared_ptr<const StoryPack> stories, JudgeMode mode = JudgeMode::Strict);

  std::string_view name() const override { return "turtle"; }
  int default_budget() const override { return kTurtleBudget; }
  std::string reset(std::uint64_t seed) override;
  StepResult step(const ActionRecord& action) override;
  std::uint64_t context_hash() const override;

  const TurtleStory& story() const noexcept { return story_; }
  double covered_weight() const noexcept;
  JudgeMode judge_mode() const noexcept { return mode_; }

  static std::size_t story_index(std::uint64_t seed, std::size_t n_stories);

 private:
  std::shared_ptr<const StoryPack> stories_;
  JudgeMode mode_;
  TurtleStory story_;
};

}  // namespace proact::turtle
