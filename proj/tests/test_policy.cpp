#include <gtest/gtest.h>

#include "proact/policy.hpp"
#include "proact/rng.hpp"

using namespace proact;

namespace {

PolicyParams random_theta(Rng& rng, double scale = 1.0) {
  PolicyParams t(kNumTemplates, kNumFeatures);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = scale * rng.normal();
  return t;
}

FeatureVector random_phi(Rng& rng) {
  FeatureVector phi(kNumFeatures);
  phi(0) = 1.0;
  for (Eigen::Index i = 1; i < phi.size(); ++i) phi(i) = rng.uniform();
  return phi;
}

}  // namespace

TEST(Policy, ZeroThetaIsUniform) {
  Rng rng(1);
  const auto lp = action_log_probs(zero_policy(), random_phi(rng));
  for (Eigen::Index a = 0; a < lp.size(); ++a) EXPECT_NEAR(std::exp(lp(a)), 0.25, 1e-15);
}

TEST(Policy, ProbabilitiesSumToOne) {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const auto lp = action_log_probs(random_theta(rng, 3.0), random_phi(rng));
    EXPECT_NEAR(lp.array().exp().sum(), 1.0, 1e-12);
  }
}

TEST(Policy, HugeLogitIsStable) {
  Eigen::Vector4d logits(1e308, 0.0, -1e308, 5.0);
  const auto lp = log_softmax(logits);
  EXPECT_TRUE(lp.allFinite() || std::isinf(lp(2)));
  EXPECT_NEAR(std::exp(lp(0)), 1.0, 1e-12);
  EXPECT_NEAR(lp.array().exp().sum(), 1.0, 1e-12);
}

TEST(Policy, SampleIsReproducible) {
  Rng g(3);
  const auto theta = random_theta(g);
  const auto phi = random_phi(g);
  Rng a(99), b(99);
  for (int i = 0; i < 50; ++i) {
    const auto sa = policy_act(theta, phi, a);
    const auto sb = policy_act(theta, phi, b);
    EXPECT_EQ(sa.template_index, sb.template_index);
    EXPECT_EQ(sa.logprob, sb.logprob);
    EXPECT_EQ(sa.logprob, log_prob(theta, phi, sa.template_index));
  }
}

TEST(Policy, SampleFrequenciesFollowProbabilities) {
  Rng g(4);
  const auto theta = random_theta(g);
  const auto phi = random_phi(g);
  const auto p = action_log_probs(theta, phi).array().exp().eval();
  Rng rng(5);
  std::vector<int> counts(kNumTemplates, 0);
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(policy_act(theta, phi, rng).template_index)];
  for (int a = 0; a < kNumTemplates; ++a) EXPECT_NEAR(counts[static_cast<std::size_t>(a)] / double(n), p(a), 0.01);
}

TEST(Policy, LogProbGradientMatchesFiniteDifferences) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto theta = random_theta(rng);
    const auto phi = random_phi(rng);
    const int a = static_cast<int>(rng.index(kNumTemplates));
    const auto g = log_prob_gradient(theta, phi, a);
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      PolicyParams tp = theta, tm = theta;
      tp.data()[i] += h;
      tm.data()[i] -= h;
      const double fd = (log_prob(tp, phi, a) - log_prob(tm, phi, a)) / (2 * h);
      EXPECT_NEAR(g.data()[i], fd, 1e-7);
    }
  }
}

TEST(Policy, TemplatedOnScalar) {
  ParamMatrix<float> theta = ParamMatrix<float>::Zero(2, 3);
  Vector<float> phi = Vector<float>::Ones(3);
  const auto lp = action_log_probs(theta, phi);
  EXPECT_NEAR(std::exp(lp(0)), 0.5f, 1e-6f);
}
