#include "proact/env_turtle.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "proact/errors.hpp"
#include "proact/rng.hpp"
#include "proact/text.hpp"

namespace proact::turtle {

namespace {

constexpr const char* kDefaultStories = R"json([
{
  "title": "The Respected Cleaner",
  "surface": "A person works every day cleaning piles of excrement at the company, and he is highly respected. Why is this?",
  "twist": "This person is a programmer. Old, large and hard-to-maintain legacy code is called a pile of excrement, and he leads his colleagues in cleaning it up, so they respect him.",
  "rubric": [
    {"id": "programmer", "weight": 0.4, "stems": ["programmer"]},
    {"id": "legacy_code", "weight": 0.35, "stems": ["legacy", "code"]},
    {"id": "colleague_respect", "weight": 0.25, "stems": ["colleague", "respect"]}
  ],
  "qa": [
    {"stems": ["programmer"], "reply": "Yes"},
    {"stems": ["janitor"], "reply": "No"},
    {"stems": ["computer"], "reply": "Yes"},
    {"stems": ["real", "excrement"], "reply": "No"},
    {"stems": ["code"], "reply": "Yes"},
    {"stems": ["toilet"], "reply": "No"},
    {"stems": ["legacy"], "reply": "Yes"},
    {"stems": ["animal"], "reply": "No"},
    {"stems": ["colleague"], "reply": "Yes"},
    {"stems": ["money"], "reply": "No"},
    {"stems": ["respect"], "reply": "Yes"},
    {"stems": ["boss"], "reply": "Maybe"}
  ]
},
{
  "title": "The Seventh Floor",
  "surface": "A man lives on the tenth floor. Every evening he rides the elevator to the seventh floor and walks the rest of the way, except on rainy days. Why?",
  "twist": "The man is very short and can only reach the button for the seventh floor. On rainy days he carries an umbrella and uses it to press the tenth-floor button.",
  "rubric": [
    {"id": "short", "weight": 0.4, "stems": ["short"]},
    {"id": "reach_button", "weight": 0.35, "stems": ["reach", "button"]},
    {"id": "umbrella", "weight": 0.25, "stems": ["umbrella", "press"]}
  ],
  "qa": [
    {"stems": ["short"], "reply": "Yes"},
    {"stems": ["exercise"], "reply": "No"},
    {"stems": ["reach"], "reply": "Yes"},
    {"stems": ["broken", "elevator"], "reply": "No"},
    {"stems": ["button"], "reply": "Yes"},
    {"stems": ["neighbor"], "reply": "No"},
    {"stems": ["umbrella"], "reply": "Yes"},
    {"stems": ["fear"], "reply": "No"},
    {"stems": ["press"], "reply": "Yes"},
    {"stems": ["health"], "reply": "No"},
    {"stems": ["rain"], "reply": "Yes"},
    {"stems": ["stairs"], "reply": "Maybe"}
  ]
},
{
  "title": "A Glass of Water",
  "surface": "A man walks into a bar and asks for a glass of water. The bartender pulls out a gun. The man says thank you and leaves. Why?",
  "twist": "The man had hiccups. The bartender scared him with the gun, which cured the hiccups, so he no longer needed the water.",
  "rubric": [
    {"id": "hiccups", "weight": 0.5, "stems": ["hiccup"]},
    {"id": "scare_cure", "weight": 0.5, "stems": ["scare", "cure"]}
  ],
  "qa": [
    {"stems": ["hiccup"], "reply": "Yes"},
    {"stems": ["thirsty"], "reply": "No"},
    {"stems": ["scare"], "reply": "Yes"},
    {"stems": ["robbery"], "reply": "No"},
    {"stems": ["cure"], "reply": "Yes"},
    {"stems": ["know", "bartender"], "reply": "No"},
    {"stems": ["help"], "reply": "Yes"},
    {"stems": ["danger"], "reply": "No"},
    {"stems": ["gun", "loaded"], "reply": "Maybe"}
  ]
},
{
  "title": "The Bankrupt Driver",
  "surface": "A man pushes his car to a hotel and tells the owner that he is bankrupt. Why?",
  "twist": "He is playing a board game of Monopoly. His token is the car, he landed on a property with a hotel and cannot pay the rent.",
  "rubric": [
    {"id": "board_game", "weight": 0.5, "stems": ["board", "game"]},
    {"id": "car_token", "weight": 0.3, "stems": ["token"]},
    {"id": "rent", "weight": 0.2, "stems": ["rent", "property"]}
  ],
  "qa": [
    {"stems": ["game"], "reply": "Yes"},
    {"stems": ["real", "car"], "reply": "No"},
    {"stems": ["board"], "reply": "Yes"},
    {"stems": ["broken", "car"], "reply": "No"},
    {"stems": ["token"], "reply": "Yes"},
    {"stems": ["drunk"], "reply": "No"},
    {"stems": ["rent"], "reply": "Yes"},
    {"stems": ["hotel", "owner", "friend"], "reply": "Maybe"},
    {"stems": ["property"], "reply": "Yes"},
    {"stems": ["crime"], "reply": "No"}
  ]
}
])json";

Reply reply_from_string(const std::string& s) {
  if (s == "Yes") return Reply::Yes;
  if (s == "No") return Reply::No;
  if (s == "Maybe") return Reply::Maybe;
  throw ParseError("qa reply must be Yes, No or Maybe, got '" + s + "'");
}

std::set<std::string> stem_set(const nlohmann::json& arr) {
  std::set<std::string> out;
  for (const auto& w : arr) out.insert(text::stem(w.get<std::string>()));
  return out;
}

TurtleStory story_from_json(const nlohmann::json& j) {
  TurtleStory s;
  s.title = j.value("title", "");
  s.surface = j.at("surface").get<std::string>();
  s.hidden_twist = j.value("twist", "");
  for (const auto& c : j.at("rubric")) {
    RubricComponent rc;
    rc.id = c.at("id").get<std::string>();
    rc.weight = c.at("weight").get<double>();
    rc.required_stems = stem_set(c.at("stems"));
    s.rubric.push_back(std::move(rc));
  }
  for (const auto& q : j.at("qa")) {
    s.qa_table.push_back({stem_set(q.at("stems")), reply_from_string(q.at("reply").get<std::string>())});
  }
  validate(s);
  return s;
}

}  // namespace

std::string_view to_string(Reply r) noexcept {
  switch (r) {
    case Reply::Yes: return "Yes";
    case Reply::No: return "No";
    case Reply::Maybe: return "Maybe";
  }
  return "Maybe";
}

std::string_view to_string(JudgeMode m) noexcept { return m == JudgeMode::Strict ? "strict" : "leaky"; }

void validate(const TurtleStory& story) {
  if (story.rubric.empty()) throw std::invalid_argument("story '" + story.title + "' has no rubric");
  double total = 0.0;
  for (const auto& c : story.rubric) {
    if (!(c.weight > 0.0 && c.weight <= 1.0)) {
      throw std::invalid_argument("rubric weight must be in (0, 1]: " + c.id);
    }
    if (c.required_stems.empty()) throw std::invalid_argument("rubric component without stems: " + c.id);
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("rubric weights of '" + story.title + "' do not sum to 1");
  }
}

const StoryPack& default_stories() {
  static const StoryPack pack = stories_from_json(kDefaultStories);
  return pack;
}

StoryPack stories_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("story pack is not JSON: ") + e.what());
  }
  StoryPack pack;
  try {
    if (j.is_array()) {
      for (const auto& s : j) pack.push_back(story_from_json(s));
    } else {
      pack.push_back(story_from_json(j));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed story pack: ") + e.what());
  }
  if (pack.empty()) throw ParseError("story pack is empty");
  return pack;
}

std::string stories_to_json(const StoryPack& pack) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& s : pack) {
    nlohmann::ordered_json j;
    j["title"] = s.title;
    j["surface"] = s.surface;
    j["twist"] = s.hidden_twist;
    j["rubric"] = nlohmann::ordered_json::array();
    for (const auto& c : s.rubric) {
      j["rubric"].push_back({{"id", c.id},
                             {"weight", c.weight},
                             {"stems", std::vector<std::string>(c.required_stems.begin(),
                                                                c.required_stems.end())}});
    }
    j["qa"] = nlohmann::ordered_json::array();
    for (const auto& q : s.qa_table) {
      j["qa"].push_back({{"stems", std::vector<std::string>(q.stems.begin(), q.stems.end())},
                         {"reply", std::string(to_string(q.reply))}});
    }
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

Judgement judge_answer(std::string_view answer, std::span<const RubricComponent> rubric, JudgeMode mode) {
  Judgement out;
  const auto stems = text::match_keys(answer);
  for (const auto& c : rubric) {
    if (c.covered) continue;
    std::size_t hits = 0;
    for (const auto& s : c.required_stems) hits += stems.contains(s) ? 1 : 0;
    const bool ok = mode == JudgeMode::Strict ? hits == c.required_stems.size() : hits > 0;
    if (ok) {
      out.newly_covered.push_back(c.id);
      out.score += c.weight;
    }
  }
  return out;
}

Reply lookup_reply(const TurtleStory& story, std::string_view question) {
  const auto stems = text::match_keys(question);
  std::size_t best = 0;
  Reply reply = Reply::Maybe;
  for (const auto& e : story.qa_table) {
    std::size_t overlap = 0;
    for (const auto& s : e.stems) overlap += stems.contains(s) ? 1 : 0;
    if (overlap > best) {
      best = overlap;
      reply = e.reply;
    }
  }
  return reply;
}

TurtleGym::TurtleGym(std::shared_ptr<const StoryPack> stories, JudgeMode mode)
    : stories_(std::move(stories)), mode_(mode) {
  if (!stories_ || stories_->empty()) throw std::invalid_argument("TurtleGym needs at least one story");
}

std::size_t TurtleGym::story_index(std::uint64_t seed, std::size_t n_stories) {
  Rng rng(derive_seed(seed, "turtle-story", 0));
  return rng.index(n_stories);
}

std::string TurtleGym::reset(std::uint64_t seed) {
  seed_ = seed;
  story_ = (*stories_)[story_index(seed, stories_->size())];
  for (auto& c : story_.rubric) c.covered = false;
  return story_.surface;
}

double TurtleGym::covered_weight() const noexcept {
  double w = 0.0;
  for (const auto& c : story_.rubric) w += c.covered ? c.weight : 0.0;
  return w;
}

StepResult TurtleGym::step(const ActionRecord& action) {
  switch (action.kind) {
    case ActionKind::Query:
      return {std::string(to_string(lookup_reply(story_, action.content))), 0.0, false};
    case ActionKind::Search:
      return {story_.surface, 0.0, false};
    case ActionKind::Answer: {
      const Judgement j = judge_answer(action.content, story_.rubric, mode_);
      for (const auto& id : j.newly_covered) {
        for (auto& c : story_.rubric) c.covered = c.covered || c.id == id;
      }
      std::size_t covered = 0;
      for (const auto& c : story_.rubric) covered += c.covered ? 1 : 0;
      const bool complete = covered_weight() >= 1.0 - 1e-9;
      std::string obs;
      if (complete) {
        obs = "Correct: every key component is explained";
      } else if (!j.newly_covered.empty()) {
        obs = "Partially correct: " + std::to_string(covered) + " of " +
              std::to_string(story_.rubric.size()) + " key components explained";
      } else {
        obs = "No new key component explained";
      }
      return {obs, j.score, complete};
    }
  }
  return {"invalid action", 0.0, false};
}

std::uint64_t TurtleGym::context_hash() const {
  return fnv1a64("turtle|" + std::string(to_string(mode_)) + "|" + story_.title + "|" + story_.surface);
}

}  // namespace proact::turtle
