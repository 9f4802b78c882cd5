#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "proact/errors.hpp"
#include "proact/grpo.hpp"
#include "proact/rng.hpp"
#include "test_util.hpp"

using namespace proact;
using namespace proact::grpo;
using proact::testing::make_traj;
using K = ActionKind;

namespace {

RolloutGroup single_turn_group(const std::vector<double>& rewards) {
  RolloutGroup g;
  g.task_id = "function/0";
  for (double r : rewards) g.trajectories.push_back(make_traj({K::Answer}, {r}));
  return g;
}

std::vector<SurrogateTerm> random_terms(Rng& rng, int n) {
  std::vector<SurrogateTerm> terms;
  for (int i = 0; i < n; ++i) {
    FeatureVector phi(kNumFeatures);
    phi(0) = 1.0;
    for (int f = 1; f < kNumFeatures; ++f) phi(f) = rng.uniform();
    terms.push_back({phi, static_cast<int>(rng.index(kNumTemplates)), std::log(0.25) + rng.uniform(-0.3, 0.3),
                     rng.normal()});
  }
  return terms;
}

}  // namespace

TEST(RewardToGo, Examples) {
  const std::vector<double> r = {0, 0, 1};
  const auto g = reward_to_go(r, 0.8);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_DOUBLE_EQ(g[2], 1.0);
  EXPECT_DOUBLE_EQ(g[1], 0.8);
  EXPECT_DOUBLE_EQ(g[0], 0.64);
  EXPECT_TRUE(reward_to_go({}, 0.8).empty());
}

TEST(GroupAdvantages, Normalizes) {
  auto adv = group_advantages(single_turn_group({1, 0, 0, 0}), {});
  EXPECT_DOUBLE_EQ(adv.mean, 0.25);
  EXPECT_NEAR(adv.std, std::sqrt(3.0) / 4, 1e-15);
  EXPECT_NEAR(adv.advantages[0][0], std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(adv.advantages[1][0], -1 / std::sqrt(3.0), 1e-12);
  EXPECT_FALSE(adv.degenerate);
}

TEST(GroupAdvantages, DegenerateGroupIsAllZero) {
  auto adv = group_advantages(single_turn_group({0.3, 0.3, 0.3}), {});
  EXPECT_TRUE(adv.degenerate);
  for (const auto& a : adv.advantages) EXPECT_EQ(a[0], 0.0);
}

TEST(GroupAdvantages, TurnLevelDiscounting) {
  RolloutGroup g;
  g.task_id = "function/0";
  g.trajectories = {make_traj({K::Query, K::Answer}, {0, 1}), make_traj({K::Answer}, {0})};
  auto adv = group_advantages(g, {});
  // R = {1, 0}: mean 0.5, std 0.5.
  EXPECT_DOUBLE_EQ(adv.advantages[0][0], (0.8 - 0.5) / 0.5);
  EXPECT_DOUBLE_EQ(adv.advantages[0][1], (1.0 - 0.5) / 0.5);
  EXPECT_DOUBLE_EQ(adv.advantages[1][0], (0.0 - 0.5) / 0.5);
}

TEST(RolloutGroup, Validation) {
  EXPECT_THROW(group_advantages(single_turn_group({1}), {}), InvalidGroup);
  auto g = single_turn_group({1, 0});
  g.trajectories[1].context_digest = "ffffffffffffffff";
  EXPECT_THROW(g.validate(), InvalidGroup);
  auto h = single_turn_group({1, 0});
  h.decisions = {{}, {}};
  EXPECT_THROW(h.validate(), InvalidGroup);
}

TEST(ClippedLoss, Examples) {
  const std::vector<double> lp = {std::log(0.5)};
  const std::vector<double> old = {std::log(0.25)};
  // rho = 2, A = 1: clipped at 1.2.
  EXPECT_NEAR(clipped_loss(lp, old, std::vector<double>{1.0}, 0.2), 1.2, 1e-12);
  // A = -1: min(-2, -1.2) = -2.
  EXPECT_NEAR(clipped_loss(lp, old, std::vector<double>{-1.0}, 0.2), -2.0, 1e-12);
  EXPECT_NEAR(clipped_loss(old, old, std::vector<double>{0.7}, 0.2), 0.7, 1e-12);
  const std::vector<double> inf = {1000.0};
  EXPECT_THROW(clipped_loss(inf, std::vector<double>{-1000.0}, std::vector<double>{1.0}, 0.2), NonFiniteRatio);
}

TEST(ClippedSurrogate, GradientMatchesFiniteDifferences) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    PolicyParams theta(kNumTemplates, kNumFeatures);
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta.data()[i] = 0.3 * rng.normal();
    const auto terms = random_terms(rng, 12);
    const auto s = clipped_surrogate(theta, terms, 0.2);
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      PolicyParams tp = theta, tm = theta;
      tp.data()[i] += h;
      tm.data()[i] -= h;
      const double fd =
          (clipped_surrogate(tp, terms, 0.2).loss - clipped_surrogate(tm, terms, 0.2).loss) / (2 * h);
      EXPECT_NEAR(s.gradient.data()[i], fd, 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(GrpoStep, ImprovesSurrogateAndSkipsDegenerate) {
  GrpoConfig cfg;
  auto env_suite = EnvSuite::defaults();
  const PolicyParams theta = zero_policy();
  std::vector<RolloutGroup> batch;
  for (std::uint64_t t = 0; t < 4; ++t) {
    batch.push_back(collect_group(theta, env_suite, "function", t, 17, cfg.group_size, 0, {0.1, 0.1}));
  }
  auto [next, stats] = grpo_step(theta, batch, cfg);
  EXPECT_EQ(next.rows(), theta.rows());
  EXPECT_GE(stats.degenerate_groups, 0);
  EXPECT_LE(stats.degenerate_groups, 4);
  if (stats.terms > 0) EXPECT_NE((next - theta).norm(), 0.0);
  EXPECT_EQ(stats.clip_fraction, 0.0);  // rho == 1 at the sampling policy
}

TEST(CollectGroup, SharedContextAndDeterministic) {
  auto env_suite = EnvSuite::defaults();
  const auto a = collect_group(zero_policy(), env_suite, "telepathy", 3, 5, 8, 0, {});
  const auto b = collect_group(zero_policy(), env_suite, "telepathy", 3, 5, 8, 0, {});
  ASSERT_EQ(a.trajectories.size(), 8u);
  EXPECT_NO_THROW(a.validate());
  EXPECT_EQ(a.trajectories, b.trajectories);
  EXPECT_NE(rollout_seed(5, a.task_id, 0), rollout_seed(5, a.task_id, 1));
}

TEST(Train, SmallRunIsReproducibleAndCheckpoints) {
  auto env_suite = EnvSuite::defaults();
  TrainOptions opts;
  opts.epochs = 2;
  opts.episodes_per_epoch = 16;
  opts.seed = 4;
  const auto path = (std::filesystem::temp_directory_path() / "proact_train_test.ckpt").string();
  opts.checkpoint_path = path;
  opts.config_echo = {{"lambda_ans", "0.1"}};
  const auto r1 = train(zero_policy(), env_suite, {}, {0.1, 0.1}, opts);
  const auto r2 = train(zero_policy(), env_suite, {}, {0.1, 0.1}, opts);
  ASSERT_EQ(r1.curve.size(), 2u);
  EXPECT_EQ(r1.theta, r2.theta);
  const auto ck = load_checkpoint(path);
  EXPECT_EQ(ck.theta, r1.theta);
  EXPECT_EQ(ck.config.at("lambda_ans"), "0.1");
  std::filesystem::remove(path);
  const auto csv = curve_csv(r1.curve, opts.config_echo);
  EXPECT_NE(csv.find("# lambda_ans=0.1\n"), std::string::npos);
  EXPECT_NE(csv.find("epoch,score,ur,exploration_ratio,loss,clip_fraction\n"), std::string::npos);
}

TEST(Checkpoint, RoundTripIsExact) {
  Rng rng(8);
  PolicyParams theta(kNumTemplates, kNumFeatures);
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta.data()[i] = rng.normal() / 3.0;
  const auto back = checkpoint_from_string(checkpoint_to_string(theta, {{"seed", "1"}}));
  EXPECT_EQ(back.theta, theta);
  EXPECT_THROW(checkpoint_from_string("nonsense"), ParseError);
  EXPECT_THROW(checkpoint_from_string("proact-policy v1\nshape 2 2\n1 2\n3\n"), ParseError);
}

TEST(GrpoConfig, Validate) {
  EXPECT_NO_THROW(GrpoConfig{}.validate());
  GrpoConfig bad;
  bad.group_size = 1;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = {};
  bad.gamma = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}
