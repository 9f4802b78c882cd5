#include <gtest/gtest.h>

#include <cmath>

#include "proact/env_telepathy.hpp"
#include "proact/errors.hpp"

using namespace proact;
using namespace proact::telepathy;

namespace {

std::shared_ptr<const EntityKB> kb_for(std::uint64_t seed) {
  return std::make_shared<const EntityKB>(build_default_kb(seed));
}

// Smallest worst-case number of perfect-or-not splits that isolates every
// entity in `idx`, by exhaustive search.
int min_splits(const EntityKB& kb, const std::vector<std::size_t>& idx, int limit) {
  if (idx.size() <= 1) return 0;
  if (limit == 0) return 1000;
  int best = 1000;
  for (const auto& tag : kb.vocabulary) {
    std::vector<std::size_t> yes, no;
    for (auto i : idx) (kb.entities[i].attributes.contains(tag) ? yes : no).push_back(i);
    if (yes.empty() || no.empty()) continue;
    const int c = 1 + std::max(min_splits(kb, yes, limit - 1), min_splits(kb, no, limit - 1));
    best = std::min(best, c);
    if (best <= static_cast<int>(std::ceil(std::log2(static_cast<double>(idx.size()))))) break;
  }
  return best;
}

}  // namespace

TEST(DefaultKB, DeterministicAndValid) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto a = build_default_kb(seed), b = build_default_kb(seed);
    ASSERT_EQ(a.entities.size(), b.entities.size());
    for (std::size_t i = 0; i < a.entities.size(); ++i) {
      EXPECT_EQ(a.entities[i].name, b.entities[i].name);
      EXPECT_EQ(a.entities[i].attributes, b.entities[i].attributes);
    }
    EXPECT_NO_THROW(validate(a));
    EXPECT_GE(a.entities.size(), 16u);
    EXPECT_GE(a.vocabulary.size(), 10u);
  }
}

TEST(DefaultKB, PerfectSplitTreeExists) {
  for (std::uint64_t seed : {0, 1}) {
    const auto kb = build_default_kb(seed);
    std::vector<std::size_t> all(kb.entities.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const int bound = static_cast<int>(std::ceil(std::log2(static_cast<double>(all.size()))));
    EXPECT_LE(min_splits(kb, all, bound), bound) << "seed " << seed;
  }
}

TEST(Validate, RejectsBrokenKBs) {
  auto kb = build_default_kb(0);
  auto dup = kb;
  dup.entities[1].attributes = dup.entities[0].attributes;
  EXPECT_THROW(validate(dup), std::invalid_argument);
  auto small = kb;
  small.entities.pop_back();
  EXPECT_THROW(validate(small), std::invalid_argument);
  auto stray = kb;
  stray.entities[0].attributes.insert("glowing");
  EXPECT_THROW(validate(stray), std::invalid_argument);
}

TEST(KBJson, RoundTripAndErrors) {
  const auto kb = build_default_kb(1);
  const auto back = kb_from_json(kb_to_json(kb));
  ASSERT_EQ(back.entities.size(), kb.entities.size());
  EXPECT_EQ(back.vocabulary, kb.vocabulary);
  for (std::size_t i = 0; i < kb.entities.size(); ++i) EXPECT_EQ(back.entities[i].name, kb.entities[i].name);
  EXPECT_THROW(kb_from_json("{"), ParseError);
  EXPECT_THROW(kb_from_json(R"({"entities":[{"name":"x"}]})"), ParseError);
}

TEST(StepTelepathy, MembershipQuery) {
  auto kb = kb_for(0);
  TelepathyGym env(kb);
  env.reset(0);
  env.set_target("cat", 0);
  auto r = env.step(query("is it a mammal"));
  EXPECT_EQ(r.observation, "Yes");
  EXPECT_EQ(r.reward, 0.0);
  EXPECT_EQ(env.step(query("is it aquatic?")).observation, "No");
  EXPECT_EQ(env.step(query("does it glow?")).observation, kUnknownAttribute);
}

TEST(StepTelepathy, AnswerIsCaseInsensitive) {
  TelepathyGym env(kb_for(0));
  env.reset(3);
  env.set_target("komodo dragon", 3);
  auto r = env.step(answer("The Komodo DRAGON"));
  EXPECT_EQ(r.reward, 1.0);
  EXPECT_TRUE(r.success);
}

TEST(StepTelepathy, WrongAnswerListsSharedTags) {
  auto kb = kb_for(0);
  // Find a pair sharing exactly three tags.
  for (const auto& t : kb->entities) {
    for (const auto& w : kb->entities) {
      if (t.name == w.name) continue;
      std::vector<std::string> shared;
      for (const auto& a : w.attributes) {
        if (t.attributes.contains(a)) shared.push_back(a);
      }
      if (shared.size() != 3) continue;
      TelepathyGym env(kb);
      env.reset(0);
      env.set_target(t.name, 0);
      auto r = env.step(answer(w.name));
      EXPECT_EQ(r.reward, 0.0);
      EXPECT_EQ(r.observation,
                "Incorrect. The target is also: " + shared[0] + ", " + shared[1] + ", " + shared[2]);
      return;
    }
  }
  FAIL() << "no pair of entities shares three tags";
}

TEST(StepTelepathy, SearchListsVocabularyAndTargetIsSeeded) {
  auto kb = kb_for(1);
  TelepathyGym a(kb), b(kb);
  a.reset(77);
  b.reset(77);
  EXPECT_EQ(a.target().name, b.target().name);
  EXPECT_EQ(a.context_hash(), b.context_hash());
  auto s = a.step(search());
  for (const auto& tag : kb->vocabulary) EXPECT_NE(s.observation.find(tag), std::string::npos);
}
