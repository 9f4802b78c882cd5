#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "proact/errors.hpp"
#include "proact/metrics.hpp"
#include "proact/rng.hpp"
#include "test_util.hpp"

using namespace proact;
using namespace proact::metrics;
using proact::testing::make_traj;
using K = ActionKind;

namespace {

std::vector<Trajectory> random_set(Rng& rng, std::size_t n, int T = 15) {
  std::vector<Trajectory> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int len = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(T)));
    std::vector<K> kinds;
    for (int j = 0; j < len; ++j) kinds.push_back(static_cast<K>(rng.index(3)));
    const bool win = kinds.back() == K::Answer && rng.bernoulli(0.5);
    std::vector<double> raw(static_cast<std::size_t>(len), 0.0);
    if (win) raw.back() = 1.0;
    out.push_back(make_traj(kinds, raw, win ? Termination::Success : Termination::BudgetExhausted, T));
  }
  return out;
}

}  // namespace

TEST(PassAtUk, Examples) {
  std::vector<Trajectory> ts = {
      make_traj({K::Query, K::Answer}, {0, 1}, Termination::Success),
      make_traj({K::Answer, K::Answer, K::Answer}, {0, 0, 1}, Termination::Success),
      make_traj({K::Answer, K::Query}, {0, 0}, Termination::BudgetExhausted),
  };
  EXPECT_DOUBLE_EQ(pass_at_u_k(ts, 1), 1.0 / 3);
  EXPECT_DOUBLE_EQ(pass_at_u_k(ts, 2), 1.0 / 3);
  EXPECT_DOUBLE_EQ(pass_at_u_k(ts, 3), 2.0 / 3);
  EXPECT_THROW(pass_at_u_k(ts, 0), std::invalid_argument);
  EXPECT_EQ(pass_at_u_k({}, 1), 0.0);
  EXPECT_EQ(answers_to_success(ts[1]), 3);
  EXPECT_FALSE(answers_to_success(ts[2]));
}

TEST(PassAtUk, MonotoneAndMatchesSuccessAtBudget) {
  Rng rng(3);
  for (int s = 0; s < 1000; ++s) {
    const auto ts = random_set(rng, 1 + rng.index(20));
    for (int k = 1; k < 15; ++k) EXPECT_LE(pass_at_u_k(ts, k), pass_at_u_k(ts, k + 1));
    EXPECT_DOUBLE_EQ(pass_at_u_k(ts, 15), success_rate(ts));
    const double ur = user_involvement_rate(ts);
    EXPECT_GE(ur, 0.0);
    EXPECT_LE(ur, 1.0);
  }
}

TEST(UserInvolvementRate, ExamplesAndEmpty) {
  std::vector<Trajectory> ts = {make_traj({K::Query, K::Answer}, {0, 1}),
                                make_traj({K::Answer, K::Answer, K::Search, K::Query}, {0, 0, 0, 0})};
  EXPECT_DOUBLE_EQ(user_involvement_rate(ts), (0.5 + 0.5) / 2);
  EXPECT_THROW(user_involvement_rate({}), EmptySet);
}

TEST(ExplorationRatio, GuardsZeroAnswers) {
  std::vector<Trajectory> ts = {make_traj({K::Query, K::Query, K::Search}, {0, 0, 0}),
                                make_traj({K::Query, K::Answer, K::Answer}, {0, 0, 1})};
  EXPECT_DOUBLE_EQ(exploration_ratio(ts), (3.0 + 0.5) / 2);
}

TEST(MeanScore, UsesRawRewards) {
  auto t = make_traj({K::Answer}, {1});
  t.turns[0].shaped_reward = -5;
  std::vector<Trajectory> ts = {t, make_traj({K::Answer}, {0.5})};
  EXPECT_DOUBLE_EQ(mean_score(ts), 0.75);
}

TEST(Bleu, FixedPoints) {
  const std::vector<std::string> same = {"the cat sat on the mat", "the cat sat on the mat"};
  EXPECT_NEAR(self_bleu(same), 1.0, 1e-12);
  const std::vector<std::string> disjoint = {"a b c d", "e f g h"};
  EXPECT_LE(self_bleu(disjoint), 1e-8);
  const std::vector<std::string> partial = {"a b c d e", "a b c x y"};
  EXPECT_NEAR(self_bleu(partial), 0.0031622776601683794, 1e-15);
  const std::vector<std::string> one = {"x"};
  EXPECT_THROW(self_bleu(one), TooFewTexts);
}

TEST(Bleu, BrevityPenalty) {
  const std::vector<std::string> hyp = {"a", "b"};
  const double b = bleu(hyp, {{"a", "b", "c", "d"}}, 1);
  EXPECT_NEAR(b, std::exp(1.0 - 2.0), 1e-12);
}

TEST(Pareto, Examples) {
  std::vector<ParetoPoint> pts = {{1, 0.2}, {2, 0.5}, {3, 0.4}, {2, 0.5}, {4, 0.9}};
  const auto f = pareto_frontier(pts);
  EXPECT_EQ(f, (std::vector<ParetoPoint>{{1, 0.2}, {2, 0.5}, {4, 0.9}}));
  EXPECT_TRUE(dominates({1, 0.5}, {2, 0.5}));
  EXPECT_FALSE(dominates({1, 0.5}, {1, 0.5}));
  EXPECT_DOUBLE_EQ(frontier_value_at(f, 3), 0.5);
  EXPECT_DOUBLE_EQ(frontier_value_at(f, 0), 0.0);
}

TEST(Pareto, SoundAndCompleteAgainstBruteForce) {
  Rng rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ParetoPoint> pts;
    const std::size_t n = 1 + rng.index(20);
    for (std::size_t i = 0; i < n; ++i) {
      pts.push_back({1 + static_cast<int>(rng.index(6)), static_cast<double>(rng.index(6)) / 5.0});
    }
    const auto f = pareto_frontier(pts);
    for (const auto& a : f) {
      for (const auto& b : f) EXPECT_FALSE(dominates(a, b));
    }
    for (const auto& p : pts) {
      bool dominated = false;
      for (const auto& q : pts) dominated = dominated || dominates(q, p);
      const bool present = std::find(f.begin(), f.end(), p) != f.end();
      EXPECT_EQ(!dominated, present);
    }
    for (std::size_t i = 1; i < f.size(); ++i) EXPECT_LT(f[i - 1].budget_k, f[i].budget_k);
  }
}

TEST(Pareto, WeakDominance) {
  std::vector<ParetoPoint> a = {{1, 0.5}, {3, 0.9}};
  std::vector<ParetoPoint> b = {{1, 0.4}, {2, 0.8}};
  EXPECT_FALSE(weakly_dominates(a, b, 3));
  EXPECT_TRUE(weakly_dominates(a, b, 1));
  EXPECT_TRUE(weakly_dominates(a, a, 5));
}

TEST(RewardTranslationRate, Examples) {
  EXPECT_DOUBLE_EQ(reward_translation_rate(0.8, 0.2), 0.25);
  EXPECT_THROW(reward_translation_rate(0.0, 0.2), ZeroTrainScore);
}

TEST(Evaluate, ReportAndJson) {
  std::vector<Trajectory> ts = {make_traj({K::Query, K::Answer}, {0, 1}, Termination::Success),
                                make_traj({K::Answer, K::Answer}, {0, 0})};
  const auto r = evaluate(ts, 3);
  EXPECT_EQ(r.n_trajectories, 2u);
  EXPECT_DOUBLE_EQ(r.pass_at_u.at(1), 0.5);
  EXPECT_DOUBLE_EQ(r.score, 0.5);
  ASSERT_TRUE(r.self_bleu);
  const auto j = nlohmann::json::parse(report_to_json(r, {{"agent", "naive"}}));
  EXPECT_EQ(j.at("config").at("agent"), "naive");
  EXPECT_DOUBLE_EQ(j.at("ur").get<double>(), 0.75);
  EXPECT_THROW(evaluate({}, 3), EmptySet);
  const auto csv = frontier_csv(std::vector<ParetoPoint>{{1, 0.5}});
  EXPECT_EQ(csv, "k,pass_rate\n1,0.500000\n");
}
