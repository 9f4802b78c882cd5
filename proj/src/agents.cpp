#include "proact/agents.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "proact/text.hpp"

namespace proact::agents {

namespace fg = function_gym;

namespace {

bool last_was_answer(std::span<const Turn> history) {
  return !history.empty() && history.back().action.kind == ActionKind::Answer;
}

}  // namespace

// ---------------------------------------------------------------------------
// Function-Gym

NaiveFunctionAgent::NaiveFunctionAgent(int max_depth, std::uint64_t seed)
    : max_depth_(max_depth), rng_(seed) {}

void NaiveFunctionAgent::begin(std::string_view, std::string_view, int) {
  test_input_.reset();
  guesses_.clear();
}

std::optional<ActionRecord> NaiveFunctionAgent::act(std::span<const Turn> history) {
  const std::size_t t = history.size();
  if (t == 0) return search();
  if (t == 1) {
    constexpr std::string_view prefix = "test input: ";
    const auto& obs = history[0].observation;
    if (obs.starts_with(prefix)) {
      if (auto n = text::parse_numbers(std::string_view(obs).substr(prefix.size()), 4)) {
        test_input_ = fg::Input{(*n)[0], (*n)[1], (*n)[2], (*n)[3]};
      }
    }
    fg::Input probe{1, 1, 1, 1};
    if (test_input_ && *test_input_ == probe) probe = {2, 2, 2, 2};
    return query(fg::format_input(probe));
  }
  if (t == 2 && test_input_) {
    // One probe's worth of evidence, then guess among everything that fits it.
    auto x = text::parse_numbers(history[1].action.content, 4);
    std::optional<double> y;
    if (history[1].observation == fg::kDivisionByZeroObservation) {
      y = std::numeric_limits<double>::quiet_NaN();
    } else if (auto v = text::parse_numbers(history[1].observation, 1)) {
      y = (*v)[0];
    }
    if (x && y) {
      const fg::Probe p{{(*x)[0], (*x)[1], (*x)[2], (*x)[3]}, *y};
      for (const auto& h : fg::enumerate_hypotheses(std::span(&p, 1), max_depth_)) {
        if (auto v = h.try_eval(*test_input_)) guesses_.push_back(*v);
      }
    }
  }
  if (guesses_.empty()) return answer("0");
  return answer(text::shortest(guesses_[rng_.index(guesses_.size())]));
}

BehavioralFunctionAgent::BehavioralFunctionAgent(int max_depth, std::uint64_t seed)
    : max_depth_(max_depth), seed_(seed), rng_(seed), memory_(max_depth) {}

void BehavioralFunctionAgent::begin(std::string_view, std::string_view, int budget_T) {
  memory_ = FunctionMemory(max_depth_);
  rng_ = Rng(seed_);
  budget_ = budget_T;
}

std::optional<ActionRecord> BehavioralFunctionAgent::act(std::span<const Turn> history) {
  memory_.update(history);
  const int remaining = budget_ - static_cast<int>(history.size());
  auto give_answer = [&] {
    auto v = memory_.best_answer();
    return answer(v ? text::shortest(*v) : "0");
  };
  if (!memory_.test_input()) return search();
  if (remaining <= 1) return give_answer();
  if (!last_was_answer(history) && (memory_.unique() || remaining <= kReserveTurns)) {
    return give_answer();
  }
  auto probe = memory_.informative_probe(rng_);
  if (!probe) probe = memory_.random_probe(rng_);
  return query(fg::format_input(*probe));
}

// ---------------------------------------------------------------------------
// Telepathy-Gym

NaiveTelepathyAgent::NaiveTelepathyAgent(std::shared_ptr<const telepathy::EntityKB> kb,
                                         std::uint64_t seed)
    : kb_(std::move(kb)), rng_(seed) {}

void NaiveTelepathyAgent::begin(std::string_view, std::string_view, int) {}

std::optional<ActionRecord> NaiveTelepathyAgent::act(std::span<const Turn> history) {
  const std::size_t t = history.size();
  if (t < 2 && t < kb_->vocabulary.size()) {
    return query(telepathy::question_for(*std::next(kb_->vocabulary.begin(), static_cast<long>(t))));
  }
  return answer(kb_->entities[rng_.index(kb_->entities.size())].name);
}

BehavioralTelepathyAgent::BehavioralTelepathyAgent(std::shared_ptr<const telepathy::EntityKB> kb,
                                                   std::uint64_t seed)
    : kb_(kb), rng_(seed), memory_(kb) {}

void BehavioralTelepathyAgent::begin(std::string_view, std::string_view, int budget_T) {
  memory_ = TelepathyMemory(kb_);
  budget_ = budget_T;
}

std::optional<ActionRecord> BehavioralTelepathyAgent::act(std::span<const Turn> history) {
  memory_.update(history);
  const int remaining = budget_ - static_cast<int>(history.size());
  const bool after_answer = last_was_answer(history);
  auto guess = [&] {
    const auto* e = memory_.best_candidate();
    return answer(e ? e->name : kb_->entities.front().name);
  };
  if (remaining <= 1) return guess();
  if (!after_answer && (memory_.unique() || remaining <= kReserveTurns)) return guess();
  if (auto tag = memory_.best_split_tag()) return query(telepathy::question_for(*tag));
  if (!after_answer) return guess();
  if (auto tag = memory_.random_unasked_tag(rng_)) return query(telepathy::question_for(*tag));
  return search();
}

// ---------------------------------------------------------------------------
// Turtle-Gym

namespace {

std::string axis_answer(const std::set<std::string>& stems) {
  std::string out = "The explanation involves ";
  bool first = true;
  for (const auto& s : stems) {
    if (!first) out += ", ";
    out += s;
    first = false;
  }
  return out + ".";
}

}  // namespace

NaiveTurtleAgent::NaiveTurtleAgent(std::shared_ptr<const turtle::StoryPack> stories,
                                   std::uint64_t seed)
    : memory_(std::move(stories)), rng_(seed) {}

void NaiveTurtleAgent::begin(std::string_view, std::string_view surface, int) {
  memory_.begin(surface);
}

std::optional<ActionRecord> NaiveTurtleAgent::act(std::span<const Turn> history) {
  const std::size_t t = history.size();
  if (memory_.axis_count() == 0) return answer("I don't know");
  if (t < 2 && t < memory_.axis_count()) return query(memory_.question(t));
  return answer(axis_answer(memory_.axes()[rng_.index(memory_.axis_count())]));
}

BehavioralTurtleAgent::BehavioralTurtleAgent(std::shared_ptr<const turtle::StoryPack> stories,
                                             std::uint64_t)
    : memory_(std::move(stories)) {}

void BehavioralTurtleAgent::begin(std::string_view, std::string_view surface, int budget_T) {
  memory_.begin(surface);
  budget_ = budget_T;
}

std::optional<ActionRecord> BehavioralTurtleAgent::act(std::span<const Turn> history) {
  memory_.update(history);
  const int remaining = budget_ - static_cast<int>(history.size());
  const bool after_answer = last_was_answer(history);
  const bool pending = memory_.pending();
  if (remaining <= 1) {
    if (pending) return answer(memory_.compose_answer());
    return std::nullopt;
  }
  if (pending && !after_answer &&
      (remaining <= kReserveTurns || memory_.new_since_answer() >= 3 || memory_.exhausted())) {
    return answer(memory_.compose_answer());
  }
  if (auto axis = memory_.next_axis()) return query(memory_.question(*axis));
  if (pending && !after_answer) return answer(memory_.compose_answer());
  return std::nullopt;
}

KeywordTurtleAgent::KeywordTurtleAgent(std::shared_ptr<const turtle::StoryPack> stories)
    : memory_(std::move(stories)) {}

void KeywordTurtleAgent::begin(std::string_view, std::string_view surface, int) {
  memory_.begin(surface);
  keywords_.clear();
  for (const auto& axis : memory_.axes()) {
    for (const auto& s : axis) {
      if (std::find(keywords_.begin(), keywords_.end(), s) == keywords_.end()) keywords_.push_back(s);
    }
  }
}

std::optional<ActionRecord> KeywordTurtleAgent::act(std::span<const Turn> history) {
  if (keywords_.empty()) return answer("nothing");
  return answer(keywords_[history.size() % keywords_.size()]);
}

std::optional<ActionRecord> ReplayAgent::act(std::span<const Turn> history) {
  if (history.size() >= actions_.size()) return std::nullopt;
  return actions_[history.size()];
}

// ---------------------------------------------------------------------------
// Trainable policy

namespace {

class FunctionAdapter final : public PolicyAdapter {
 public:
  explicit FunctionAdapter(int max_depth) : max_depth_(max_depth), memory_(max_depth) {}
  void begin(std::string_view, int) override { memory_ = FunctionMemory(max_depth_); }
  void update(std::span<const Turn> history) override { memory_.update(history); }
  bool hypothesis_unique() const override { return memory_.unique(); }
  ActionRecord render(int k, Rng& rng) override {
    switch (k) {
      case 0: {
        auto x = memory_.next_canonical();
        return query(fg::format_input(x ? *x : memory_.random_probe(rng)));
      }
      case 1:
        return query(fg::format_input(memory_.random_probe(rng)));
      case 2:
        return search();
      default: {
        auto v = memory_.best_answer();
        return answer(v ? text::shortest(*v) : "0");
      }
    }
  }
  std::vector<std::string> template_names() const override {
    return {"probe_next_canonical", "probe_random", "search_test", "answer_best_hypothesis"};
  }

 private:
  int max_depth_;
  FunctionMemory memory_;
};

class TelepathyAdapter final : public PolicyAdapter {
 public:
  explicit TelepathyAdapter(std::shared_ptr<const telepathy::EntityKB> kb)
      : kb_(kb), memory_(kb) {}
  void begin(std::string_view, int) override { memory_ = TelepathyMemory(kb_); }
  void update(std::span<const Turn> history) override { memory_.update(history); }
  bool hypothesis_unique() const override { return memory_.unique(); }
  ActionRecord render(int k, Rng& rng) override {
    switch (k) {
      case 0: {
        auto tag = memory_.best_split_tag();
        if (!tag) tag = memory_.random_unasked_tag(rng);
        return query(telepathy::question_for(tag ? *tag : *kb_->vocabulary.begin()));
      }
      case 1: {
        auto tag = memory_.random_unasked_tag(rng);
        return query(telepathy::question_for(tag ? *tag : *kb_->vocabulary.begin()));
      }
      case 2:
        return search();
      default: {
        const auto* e = memory_.best_candidate();
        return answer(e ? e->name : kb_->entities.front().name);
      }
    }
  }
  std::vector<std::string> template_names() const override {
    return {"query_best_split", "query_random", "search_vocab", "answer_best_candidate"};
  }

 private:
  std::shared_ptr<const telepathy::EntityKB> kb_;
  TelepathyMemory memory_;
};

class TurtleAdapter final : public PolicyAdapter {
 public:
  explicit TurtleAdapter(std::shared_ptr<const turtle::StoryPack> stories)
      : memory_(std::move(stories)) {}
  void begin(std::string_view surface, int) override { memory_.begin(surface); }
  void update(std::span<const Turn> history) override { memory_.update(history); }
  bool hypothesis_unique() const override { return memory_.exhausted(); }
  ActionRecord render(int k, Rng& rng) override {
    switch (k) {
      case 0: {
        auto axis = memory_.next_axis();
        if (!axis) axis = memory_.random_axis(rng);
        return query(axis ? memory_.question(*axis) : "Is there anything else?");
      }
      case 1: {
        auto axis = memory_.random_axis(rng);
        return query(axis ? memory_.question(*axis) : "Is there anything else?");
      }
      case 2:
        return search();
      default: {
        auto a = memory_.compose_answer();
        return answer(a.empty() ? "I don't know" : a);
      }
    }
  }
  std::vector<std::string> template_names() const override {
    return {"query_next_axis", "query_random_axis", "search_surface", "answer_confirmed"};
  }

 private:
  TurtleMemory memory_;
};

}  // namespace

std::unique_ptr<PolicyAdapter> make_adapter(std::string_view env_name, const EnvSuite& suite) {
  if (env_name == "function") return std::make_unique<FunctionAdapter>(suite.function_max_depth);
  if (env_name == "telepathy") return std::make_unique<TelepathyAdapter>(suite.kb);
  if (env_name == "turtle") return std::make_unique<TurtleAdapter>(suite.stories);
  throw std::invalid_argument("unknown environment '" + std::string(env_name) + "'");
}

PolicyAgent::PolicyAgent(std::shared_ptr<const PolicyParams> theta,
                         std::unique_ptr<PolicyAdapter> adapter, std::uint64_t seed)
    : theta_(std::move(theta)), adapter_(std::move(adapter)), rng_(seed) {
  if (!theta_ || !adapter_) throw std::invalid_argument("PolicyAgent needs parameters and an adapter");
  if (theta_->rows() != kNumTemplates || theta_->cols() != kNumFeatures) {
    throw std::invalid_argument("policy parameters must be 4 x 6");
  }
}

void PolicyAgent::begin(std::string_view, std::string_view initial_observation, int budget_T) {
  adapter_->begin(initial_observation, budget_T);
  budget_ = budget_T;
  decisions_.clear();
}

std::optional<ActionRecord> PolicyAgent::act(std::span<const Turn> history) {
  adapter_->update(history);
  FeatureVector phi = make_features(history, budget_, adapter_->hypothesis_unique());
  const PolicySample s = policy_act(*theta_, phi, rng_);
  decisions_.push_back({std::move(phi), s.template_index, s.logprob});
  return adapter_->render(s.template_index, rng_);
}

std::unique_ptr<Agent> make_agent(std::string_view agent_name, std::string_view env_name,
                                  const EnvSuite& suite, std::uint64_t seed,
                                  std::shared_ptr<const PolicyParams> theta) {
  const bool fn = env_name == "function", tp = env_name == "telepathy", tt = env_name == "turtle";
  if (!fn && !tp && !tt) throw std::invalid_argument("unknown environment '" + std::string(env_name) + "'");
  if (agent_name == "naive") {
    if (fn) return std::make_unique<NaiveFunctionAgent>(suite.function_max_depth, seed);
    if (tp) return std::make_unique<NaiveTelepathyAgent>(suite.kb, seed);
    return std::make_unique<NaiveTurtleAgent>(suite.stories, seed);
  }
  if (agent_name == "behavioral") {
    if (fn) return std::make_unique<BehavioralFunctionAgent>(suite.function_max_depth, seed);
    if (tp) return std::make_unique<BehavioralTelepathyAgent>(suite.kb, seed);
    return std::make_unique<BehavioralTurtleAgent>(suite.stories, seed);
  }
  if (agent_name == "trainable") {
    if (!theta) theta = std::make_shared<const PolicyParams>(zero_policy());
    return std::make_unique<PolicyAgent>(std::move(theta), make_adapter(env_name, suite), seed);
  }
  if (agent_name == "keyword") {
    if (!tt) throw std::invalid_argument("the keyword agent only plays turtle");
    return std::make_unique<KeywordTurtleAgent>(suite.stories);
  }
  throw std::invalid_argument("unknown agent '" + std::string(agent_name) + "'");
}

}  // namespace proact::agents
