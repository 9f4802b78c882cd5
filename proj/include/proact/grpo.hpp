#pragma once

// Group-relative policy optimization with turn-level discounted advantages
// and a clipped importance-ratio surrogate, for the softmax-linear policy.

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "proact/agents.hpp"
#include "proact/mdp.hpp"
#include "proact/policy.hpp"
#include "proact/shaping.hpp"
#include "proact/suite.hpp"

namespace proact::grpo {

struct GrpoConfig {
  double gamma = 0.8;
  double clip_eps = 0.2;
  int group_size = 8;
  double std_floor = 1e-8;
  double learning_rate = 0.5;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// G_t = r_t + gamma * G_{t+1}.
std::vector<double> reward_to_go(std::span<const double> rewards, double gamma);

/// N rollouts of one task. `decisions[i][t]` is the sampling policy's record
/// for turn t of trajectory i; it may be left empty when only advantages are
/// needed.
struct RolloutGroup {
  std::string task_id;
  std::vector<Trajectory> trajectories;
  std::vector<std::vector<agents::Decision>> decisions;

  /// Throws InvalidGroup: N >= 2, shared context digest, decisions aligned.
  void validate() const;
};

struct TurnAdvantages {
  std::vector<std::vector<double>> reward_to_go;  // from shaped rewards
  std::vector<double> returns;                    // R^i, shaped
  std::vector<std::vector<double>> advantages;
  double mean = 0.0;
  double std = 0.0;  // population std before flooring
  /// All returns equal; advantages then use std_floor.
  bool degenerate = false;
};

TurnAdvantages group_advantages(const RolloutGroup& group, const GrpoConfig& cfg);

/// Mean over terms of min(rho * A, clip(rho, 1 - eps, 1 + eps) * A) with
/// rho = exp(new - old). Throws NonFiniteRatio.
double clipped_loss(std::span<const double> new_logprobs, std::span<const double> old_logprobs,
                    std::span<const double> advantages, double clip_eps);

/// One decision with its credit.
struct SurrogateTerm {
  FeatureVector features;
  int action = 0;
  double old_logprob = 0.0;
  double advantage = 0.0;
};

struct Surrogate {
  double loss = 0.0;
  PolicyParams gradient;
  double clip_fraction = 0.0;
};

/// clipped_loss at theta and its analytic gradient.
Surrogate clipped_surrogate(const PolicyParams& theta, std::span<const SurrogateTerm> terms,
                            double clip_eps);

struct StepStats {
  double loss = 0.0;
  double mean_abs_advantage = 0.0;
  double clip_fraction = 0.0;
  double mean_shaped_return = 0.0;
  int degenerate_groups = 0;
  int terms = 0;
};

/// One gradient-ascent step. Groups whose returns are all equal carry no
/// relative signal and are left out of the update.
std::pair<PolicyParams, StepStats> grpo_step(const PolicyParams& theta,
                                             std::span<const RolloutGroup> batch,
                                             const GrpoConfig& cfg);

struct CurvePoint {
  int epoch = 0;
  double score = 0.0;
  double ur = 0.0;
  double exploration_ratio = 0.0;
  double loss = 0.0;
  double clip_fraction = 0.0;
};

struct TrainOptions {
  std::string env = "function";
  int epochs = 30;
  int episodes_per_epoch = 128;
  std::uint64_t seed = 0;
  int budget_T = 0;  // 0: the environment's default
  /// Written after every epoch and on abort when non-empty.
  std::string checkpoint_path;
  std::map<std::string, std::string> config_echo;
};

struct TrainResult {
  PolicyParams theta;
  std::vector<CurvePoint> curve;
};

/// Seed of the i-th rollout of a task within a batch.
std::uint64_t rollout_seed(std::uint64_t batch_seed, std::string_view task_id, int i) noexcept;

/// Plays the N rollouts of one task with the given policy.
RolloutGroup collect_group(const PolicyParams& theta, const EnvSuite& suite, std::string_view env,
                           std::uint64_t task_seed, std::uint64_t batch_seed, int group_size,
                           int budget_T, const ShapingConfig& shaping);

TrainResult train(const PolicyParams& init, const EnvSuite& suite, const GrpoConfig& cfg,
                  const ShapingConfig& shaping, const TrainOptions& opts);

std::string curve_csv(std::span<const CurvePoint> curve,
                      const std::map<std::string, std::string>& config_echo = {});

struct Checkpoint {
  PolicyParams theta;
  std::map<std::string, std::string> config;
};

void save_checkpoint(const std::string& path, const PolicyParams& theta,
                     const std::map<std::string, std::string>& config_echo);
/// Throws ParseError.
Checkpoint load_checkpoint(const std::string& path);
std::string checkpoint_to_string(const PolicyParams& theta,
                                 const std::map<std::string, std::string>& config_echo);
Checkpoint checkpoint_from_string(const std::string& text);

}  // namespace proact::grpo
