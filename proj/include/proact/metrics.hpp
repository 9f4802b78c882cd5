#pragma once

// Evaluation metrics over trajectory sets. Everything here reads raw rewards
// and action kinds only, so shaping never changes a reported number.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proact/mdp.hpp"

namespace proact::metrics {

/// Answers used up to and including the succeeding turn; nullopt on failure.
std::optional<int> answers_to_success(const Trajectory& traj) noexcept;

/// Fraction of trajectories solved with at most k Answer actions. Throws
/// std::invalid_argument for k < 1. Empty sets give 0.
double pass_at_u_k(std::span<const Trajectory> trajs, int k);

double success_rate(std::span<const Trajectory> trajs) noexcept;

/// Mean of U(tau)/|tau|. Throws EmptySet.
double user_involvement_rate(std::span<const Trajectory> trajs);

/// Mean of #A_e / max(U, 1). Empty sets give 0.
double exploration_ratio(std::span<const Trajectory> trajs) noexcept;

/// Mean raw return.
double mean_score(std::span<const Trajectory> trajs) noexcept;

/// Sentence BLEU of `hypothesis` against several references: clipped n-gram
/// precisions for n = 1..max_n, zero precisions floored at 1e-9, geometric
/// mean, brevity penalty against the closest reference length.
double bleu(const std::vector<std::string>& hypothesis,
            const std::vector<std::vector<std::string>>& references, int max_n = 4);

/// Mean BLEU of each text against all the others (whitespace tokens).
/// Throws TooFewTexts for fewer than two texts.
double self_bleu(std::span<const std::string> texts, int max_n = 4);

/// Pluggable text-similarity scorer (an embedding model, say). None ships.
class SimilarityScorer {
 public:
  virtual ~SimilarityScorer() = default;
  virtual double similarity(const std::string& a, const std::string& b) const = 0;
};

struct ParetoPoint {
  int budget_k = 1;
  double pass_rate = 0.0;
  friend bool operator==(const ParetoPoint&, const ParetoPoint&) = default;
};

/// Budget <= and pass rate >=, one of them strict.
bool dominates(const ParetoPoint& p, const ParetoPoint& q) noexcept;

/// Non-dominated subset sorted by budget. Among duplicates the first
/// occurrence is kept.
std::vector<ParetoPoint> pareto_frontier(std::span<const ParetoPoint> points);

/// (k, Pass@U-k) for k = 1..k_max.
std::vector<ParetoPoint> pass_curve(std::span<const Trajectory> trajs, int k_max);

/// Best pass rate reachable on `frontier` with budget at most k (0 if none).
double frontier_value_at(std::span<const ParetoPoint> frontier, int k) noexcept;

/// True when `a` reaches at least the pass rate of `b` at every k in 1..k_max.
bool weakly_dominates(std::span<const ParetoPoint> a, std::span<const ParetoPoint> b, int k_max) noexcept;

/// eval / train. Throws ZeroTrainScore unless train_score > 0.
double reward_translation_rate(double train_score, double eval_score);

struct EvalReport {
  std::map<int, double> pass_at_u;
  double ur = 0.0;
  double score = 0.0;
  double exploration_ratio = 0.0;
  /// Over the concatenated action contents of each trajectory; absent with
  /// fewer than two trajectories.
  std::optional<double> self_bleu;
  double success_rate = 0.0;
  std::size_t n_trajectories = 0;
};

/// Throws EmptySet on an empty set.
EvalReport evaluate(std::span<const Trajectory> trajs, int k_max);

/// Pretty JSON; `config` lines are echoed under "config".
std::string report_to_json(const EvalReport& report,
                           const std::map<std::string, std::string>& config = {});

/// "k,pass_rate" header then one row per point.
std::string frontier_csv(std::span<const ParetoPoint> frontier);

}  // namespace proact::metrics
