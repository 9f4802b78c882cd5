#pragma once

// Softmax-linear policy over K action templates: pi(a | phi) = softmax(theta phi)_a
// with theta of shape K x F.

#include <Eigen/Dense>
#include <cmath>

#include "proact/rng.hpp"

namespace proact {

template <class Scalar>
using ParamMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using PolicyParams = ParamMatrix<double>;
using FeatureVector = Vector<double>;

inline constexpr int kNumTemplates = 4;
inline constexpr int kNumFeatures = 6;

/// Max-shifted log-softmax.
template <class Derived>
Vector<typename Derived::Scalar> log_softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = logits.maxCoeff();
  const Scalar lse = m + std::log((logits.array() - m).exp().sum());
  return (logits.array() - lse).matrix();
}

template <class Scalar>
Vector<Scalar> action_log_probs(const ParamMatrix<Scalar>& theta, const Vector<Scalar>& phi) {
  return log_softmax(theta * phi);
}

template <class Scalar>
Scalar log_prob(const ParamMatrix<Scalar>& theta, const Vector<Scalar>& phi, Eigen::Index action) {
  return action_log_probs(theta, phi)(action);
}

/// d log pi(a | phi) / d theta = (e_a - p) phi^T.
template <class Scalar>
ParamMatrix<Scalar> log_prob_gradient(const ParamMatrix<Scalar>& theta, const Vector<Scalar>& phi,
                                      Eigen::Index action) {
  Vector<Scalar> coeff = -action_log_probs(theta, phi).array().exp().matrix();
  coeff(action) += Scalar(1);
  return coeff * phi.transpose();
}

struct PolicySample {
  int template_index = 0;
  double logprob = 0.0;
};

/// Inverse-CDF sample from softmax(theta phi) with the exact log-probability.
inline PolicySample policy_act(const PolicyParams& theta, const FeatureVector& phi, Rng& rng) {
  const FeatureVector lp = action_log_probs(theta, phi);
  const double u = rng.uniform();
  double acc = 0.0;
  Eigen::Index pick = lp.size() - 1;
  for (Eigen::Index a = 0; a < lp.size(); ++a) {
    acc += std::exp(lp(a));
    if (u < acc) {
      pick = a;
      break;
    }
  }
  return {static_cast<int>(pick), lp(pick)};
}

inline PolicyParams zero_policy(int templates = kNumTemplates, int features = kNumFeatures) {
  return PolicyParams::Zero(templates, features);
}

}  // namespace proact
