#include "proact/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "proact/errors.hpp"
#include "proact/metrics.hpp"
#include "proact/text.hpp"

namespace proact::grpo {

void GrpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (!(clip_eps > 0.0)) throw std::invalid_argument("clip_eps must be positive");
  if (group_size < 2) throw std::invalid_argument("group_size must be at least 2");
  if (!(std_floor > 0.0)) throw std::invalid_argument("std_floor must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
}

std::vector<double> reward_to_go(std::span<const double> rewards, double gamma) {
  std::vector<double> g(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    g[i] = acc;
  }
  return g;
}

void RolloutGroup::validate() const {
  if (trajectories.size() < 2) throw InvalidGroup("group " + task_id + " needs at least two rollouts");
  for (const auto& t : trajectories) {
    if (t.context_digest != trajectories.front().context_digest) {
      throw InvalidGroup("group " + task_id + " mixes hidden contexts");
    }
  }
  if (decisions.empty()) return;
  if (decisions.size() != trajectories.size()) {
    throw InvalidGroup("group " + task_id + ": decision lists do not match trajectories");
  }
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    if (decisions[i].size() != trajectories[i].turns.size()) {
      throw InvalidGroup("group " + task_id + ": trajectory " + std::to_string(i) +
                         " has a turn without a recorded decision");
    }
  }
}

TurnAdvantages group_advantages(const RolloutGroup& group, const GrpoConfig& cfg) {
  group.validate();
  TurnAdvantages out;
  const auto n = static_cast<double>(group.trajectories.size());
  for (const auto& traj : group.trajectories) {
    std::vector<double> r;
    r.reserve(traj.turns.size());
    double total = 0.0;
    for (const auto& t : traj.turns) {
      r.push_back(t.shaped_reward);
      total += t.shaped_reward;
    }
    out.reward_to_go.push_back(reward_to_go(r, cfg.gamma));
    out.returns.push_back(total);
  }
  const bool all_equal = std::all_of(out.returns.begin(), out.returns.end(),
                                     [&](double v) { return v == out.returns.front(); });
  double sum = 0.0;
  for (double v : out.returns) sum += v;
  out.mean = all_equal ? out.returns.front() : sum / n;
  double var = 0.0;
  for (double v : out.returns) var += (v - out.mean) * (v - out.mean);
  out.std = all_equal ? 0.0 : std::sqrt(var / n);
  out.degenerate = out.std <= cfg.std_floor;
  const double denom = out.degenerate ? cfg.std_floor : out.std;
  for (const auto& g : out.reward_to_go) {
    std::vector<double> a;
    a.reserve(g.size());
    for (double v : g) a.push_back((v - out.mean) / denom);
    out.advantages.push_back(std::move(a));
  }
  return out;
}

namespace {

double checked_ratio(double new_lp, double old_lp) {
  const double rho = std::exp(new_lp - old_lp);
  if (!std::isfinite(rho)) throw NonFiniteRatio("importance ratio overflowed");
  return rho;
}

}  // namespace

double clipped_loss(std::span<const double> new_lp, std::span<const double> old_lp,
                    std::span<const double> adv, double eps) {
  if (new_lp.size() != old_lp.size() || new_lp.size() != adv.size()) {
    throw std::invalid_argument("clipped_loss: length mismatch");
  }
  if (new_lp.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < new_lp.size(); ++i) {
    const double rho = checked_ratio(new_lp[i], old_lp[i]);
    sum += std::min(rho * adv[i], std::clamp(rho, 1.0 - eps, 1.0 + eps) * adv[i]);
  }
  return sum / static_cast<double>(new_lp.size());
}

Surrogate clipped_surrogate(const PolicyParams& theta, std::span<const SurrogateTerm> terms, double eps) {
  Surrogate out;
  out.gradient = PolicyParams::Zero(theta.rows(), theta.cols());
  if (terms.empty()) return out;
  std::size_t clipped_terms = 0;
  for (const auto& term : terms) {
    const FeatureVector lp = action_log_probs(theta, term.features);
    const double rho = checked_ratio(lp(term.action), term.old_logprob);
    const double a = term.advantage;
    const double unclipped = rho * a;
    const double clipped = std::clamp(rho, 1.0 - eps, 1.0 + eps) * a;
    out.loss += std::min(unclipped, clipped);
    if (std::abs(rho - 1.0) > eps) ++clipped_terms;
    if (unclipped <= clipped) {
      // d(rho A)/d theta = A rho d log pi
      FeatureVector coeff = -lp.array().exp().matrix();
      coeff(term.action) += 1.0;
      out.gradient.noalias() += (a * rho) * coeff * term.features.transpose();
    }
  }
  const auto n = static_cast<double>(terms.size());
  out.loss /= n;
  out.gradient /= n;
  out.clip_fraction = static_cast<double>(clipped_terms) / n;
  return out;
}

std::pair<PolicyParams, StepStats> grpo_step(const PolicyParams& theta,
                                             std::span<const RolloutGroup> batch,
                                             const GrpoConfig& cfg) {
  cfg.validate();
  StepStats stats;
  std::vector<SurrogateTerm> terms;
  double shaped_sum = 0.0;
  std::size_t n_traj = 0;
  double abs_adv = 0.0;
  for (const auto& group : batch) {
    if (group.decisions.empty()) throw InvalidGroup("group " + group.task_id + " has no decisions");
    const TurnAdvantages adv = group_advantages(group, cfg);
    for (double r : adv.returns) shaped_sum += r;
    n_traj += adv.returns.size();
    if (adv.degenerate) {
      ++stats.degenerate_groups;
      continue;
    }
    for (std::size_t i = 0; i < group.trajectories.size(); ++i) {
      for (std::size_t t = 0; t < group.decisions[i].size(); ++t) {
        const auto& d = group.decisions[i][t];
        terms.push_back({d.features, d.template_index, d.logprob, adv.advantages[i][t]});
        abs_adv += std::abs(adv.advantages[i][t]);
      }
    }
  }
  const Surrogate s = clipped_surrogate(theta, terms, cfg.clip_eps);
  stats.loss = s.loss;
  stats.clip_fraction = s.clip_fraction;
  stats.terms = static_cast<int>(terms.size());
  stats.mean_abs_advantage = terms.empty() ? 0.0 : abs_adv / static_cast<double>(terms.size());
  stats.mean_shaped_return = n_traj == 0 ? 0.0 : shaped_sum / static_cast<double>(n_traj);
  PolicyParams next = theta + cfg.learning_rate * s.gradient;
  if (!next.allFinite()) throw NonFiniteRatio("policy update produced non-finite parameters");
  return {std::move(next), stats};
}

// ---------------------------------------------------------------------------

std::uint64_t rollout_seed(std::uint64_t batch_seed, std::string_view task_id, int i) noexcept {
  return derive_seed(batch_seed, task_id, static_cast<std::uint64_t>(i));
}

RolloutGroup collect_group(const PolicyParams& theta, const EnvSuite& suite, std::string_view env_name,
                           std::uint64_t task_seed, std::uint64_t batch_seed, int group_size,
                           int budget_T, const ShapingConfig& shaping) {
  auto params = std::make_shared<const PolicyParams>(theta);
  auto env = suite.make(env_name);
  const int budget = budget_T > 0 ? budget_T : env->default_budget();
  RolloutGroup group;
  group.task_id = make_task_id(env_name, task_seed);
  for (int i = 0; i < group_size; ++i) {
    agents::PolicyAgent agent(params, agents::make_adapter(env_name, suite),
                              rollout_seed(batch_seed, group.task_id, i));
    Trajectory traj = run_episode(*env, agent, {budget, task_seed});
    group.trajectories.push_back(shape(std::move(traj), shaping, budget));
    group.decisions.push_back(agent.decisions());
  }
  return group;
}

TrainResult train(const PolicyParams& init, const EnvSuite& suite, const GrpoConfig& cfg,
                  const ShapingConfig& shaping, const TrainOptions& opts) {
  cfg.validate();
  shaping.validate();
  if (opts.epochs < 0 || opts.episodes_per_epoch < 0) {
    throw std::invalid_argument("epochs and episodes must be non-negative");
  }
  TrainResult result{init, {}};
  const int tasks = std::max(1, opts.episodes_per_epoch / cfg.group_size);
  try {
    for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
      const std::uint64_t batch_seed = derive_seed(opts.seed, "train-batch", static_cast<std::uint64_t>(epoch));
      std::vector<RolloutGroup> batch;
      std::vector<Trajectory> all;
      for (int j = 0; j < tasks; ++j) {
        const std::uint64_t task_seed = derive_seed(batch_seed, "task", static_cast<std::uint64_t>(j)) >> 16;
        batch.push_back(collect_group(result.theta, suite, opts.env, task_seed, batch_seed, cfg.group_size,
                                      opts.budget_T, shaping));
        all.insert(all.end(), batch.back().trajectories.begin(), batch.back().trajectories.end());
      }
      auto [next, stats] = grpo_step(result.theta, batch, cfg);
      result.theta = std::move(next);
      result.curve.push_back({epoch, metrics::mean_score(all), metrics::user_involvement_rate(all),
                              metrics::exploration_ratio(all), stats.loss, stats.clip_fraction});
      if (!opts.checkpoint_path.empty()) save_checkpoint(opts.checkpoint_path, result.theta, opts.config_echo);
    }
  } catch (...) {
    if (!opts.checkpoint_path.empty()) save_checkpoint(opts.checkpoint_path, result.theta, opts.config_echo);
    throw;
  }
  if (!opts.checkpoint_path.empty() && opts.epochs == 0) {
    save_checkpoint(opts.checkpoint_path, result.theta, opts.config_echo);
  }
  return result;
}

std::string curve_csv(std::span<const CurvePoint> curve, const std::map<std::string, std::string>& echo) {
  std::string out;
  for (const auto& [k, v] : echo) out += "# " + k + "=" + v + "\n";
  out += "epoch,score,ur,exploration_ratio,loss,clip_fraction\n";
  for (const auto& p : curve) {
    out += std::to_string(p.epoch) + "," + text::fixed6(p.score) + "," + text::fixed6(p.ur) + "," +
           text::fixed6(p.exploration_ratio) + "," + text::fixed6(p.loss) + "," +
           text::fixed6(p.clip_fraction) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::string_view kCheckpointHeader = "proact-policy v1";
}

std::string checkpoint_to_string(const PolicyParams& theta, const std::map<std::string, std::string>& echo) {
  std::string out(kCheckpointHeader);
  out += "\n";
  for (const auto& [k, v] : echo) out += "# " + k + "=" + v + "\n";
  out += "shape " + std::to_string(theta.rows()) + " " + std::to_string(theta.cols()) + "\n";
  for (Eigen::Index r = 0; r < theta.rows(); ++r) {
    for (Eigen::Index c = 0; c < theta.cols(); ++c) {
      if (c > 0) out += " ";
      out += text::shortest(theta(r, c));
    }
    out += "\n";
  }
  return out;
}

Checkpoint checkpoint_from_string(const std::string& src) {
  std::istringstream is(src);
  std::string line;
  if (!std::getline(is, line) || text::trim(line) != kCheckpointHeader) {
    throw ParseError("not a policy checkpoint (bad header)");
  }
  Checkpoint cp;
  long rows = -1, cols = -1;
  while (std::getline(is, line)) {
    const std::string s = text::trim(line);
    if (s.empty()) continue;
    if (s.starts_with("#")) {
      const std::string kv = text::trim(s.substr(1));
      const auto eq = kv.find('=');
      if (eq != std::string::npos) cp.config[kv.substr(0, eq)] = kv.substr(eq + 1);
      continue;
    }
    if (s.starts_with("shape ")) {
      auto dims = text::parse_numbers(s.substr(6), 2);
      if (!dims || (*dims)[0] < 1 || (*dims)[1] < 1) throw ParseError("checkpoint: bad shape line");
      rows = static_cast<long>((*dims)[0]);
      cols = static_cast<long>((*dims)[1]);
      break;
    }
    throw ParseError("checkpoint: unexpected line '" + s + "'");
  }
  if (rows < 0) throw ParseError("checkpoint: missing shape line");
  cp.theta = PolicyParams::Zero(rows, cols);
  for (long r = 0; r < rows; ++r) {
    if (!std::getline(is, line)) throw ParseError("checkpoint: truncated parameters");
    auto vals = text::parse_numbers(line, static_cast<std::size_t>(cols));
    if (!vals) throw ParseError("checkpoint: bad parameter row " + std::to_string(r + 1));
    for (long c = 0; c < cols; ++c) cp.theta(r, c) = (*vals)[static_cast<std::size_t>(c)];
  }
  return cp;
}

void save_checkpoint(const std::string& path, const PolicyParams& theta,
                     const std::map<std::string, std::string>& echo) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint " + path);
    out << checkpoint_to_string(theta, echo);
    if (!out) throw Error("cannot write checkpoint " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("cannot move checkpoint into " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace proact::grpo
