#include "proact/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "proact/errors.hpp"
#include "proact/text.hpp"

namespace proact::metrics {

std::optional<int> answers_to_success(const Trajectory& traj) noexcept {
  if (!traj.succeeded()) return std::nullopt;
  int answers = 0;
  for (const auto& t : traj.turns) answers += is_user_involved(t.action.kind) ? 1 : 0;
  return answers;
}

double pass_at_u_k(std::span<const Trajectory> trajs, int k) {
  if (k < 1) throw std::invalid_argument("pass_at_u_k needs k >= 1");
  if (trajs.empty()) return 0.0;
  std::size_t pass = 0;
  for (const auto& t : trajs) {
    auto used = answers_to_success(t);
    if (used && *used <= k) ++pass;
  }
  return static_cast<double>(pass) / static_cast<double>(trajs.size());
}

double success_rate(std::span<const Trajectory> trajs) noexcept {
  if (trajs.empty()) return 0.0;
  std::size_t n = 0;
  for (const auto& t : trajs) n += t.succeeded() ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(trajs.size());
}

double user_involvement_rate(std::span<const Trajectory> trajs) {
  if (trajs.empty()) throw EmptySet();
  double sum = 0.0;
  for (const auto& t : trajs) {
    if (!t.turns.empty()) sum += static_cast<double>(user_action_count(t)) / static_cast<double>(t.size());
  }
  return sum / static_cast<double>(trajs.size());
}

double exploration_ratio(std::span<const Trajectory> trajs) noexcept {
  if (trajs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : trajs) {
    sum += static_cast<double>(env_action_count(t)) / std::max(user_action_count(t), 1);
  }
  return sum / static_cast<double>(trajs.size());
}

double mean_score(std::span<const Trajectory> trajs) noexcept {
  if (trajs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : trajs) sum += raw_return(t);
  return sum / static_cast<double>(trajs.size());
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kBleuFloor = 1e-9;

using Gram = std::vector<std::string>;

std::map<Gram, int> ngram_counts(const std::vector<std::string>& toks, int n) {
  std::map<Gram, int> out;
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + un <= toks.size(); ++i) {
    ++out[Gram(toks.begin() + static_cast<long>(i), toks.begin() + static_cast<long>(i + un))];
  }
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

}  // namespace

double bleu(const std::vector<std::string>& hyp, const std::vector<std::vector<std::string>>& refs,
            int max_n) {
  if (max_n < 1) throw std::invalid_argument("bleu needs max_n >= 1");
  if (hyp.empty() || refs.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const auto hc = ngram_counts(hyp, n);
    std::map<Gram, int> max_ref;
    for (const auto& r : refs) {
      for (const auto& [g, c] : ngram_counts(r, n)) max_ref[g] = std::max(max_ref[g], c);
    }
    long clipped = 0, total = 0;
    for (const auto& [g, c] : hc) {
      total += c;
      auto it = max_ref.find(g);
      if (it != max_ref.end()) clipped += std::min(c, it->second);
    }
    const double p = (clipped == 0 || total == 0) ? kBleuFloor
                                                  : static_cast<double>(clipped) / static_cast<double>(total);
    log_sum += std::log(p);
  }
  const auto c = static_cast<double>(hyp.size());
  double r = static_cast<double>(refs.front().size());
  for (const auto& ref : refs) {
    const auto len = static_cast<double>(ref.size());
    const double d = std::abs(len - c), best = std::abs(r - c);
    if (d < best || (d == best && len < r)) r = len;
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return std::clamp(bp * std::exp(log_sum / max_n), 0.0, 1.0);
}

double self_bleu(std::span<const std::string> texts, int max_n) {
  if (texts.size() < 2) throw TooFewTexts();
  std::vector<std::vector<std::string>> toks;
  toks.reserve(texts.size());
  for (const auto& t : texts) toks.push_back(split_ws(t));
  double sum = 0.0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    std::vector<std::vector<std::string>> refs;
    for (std::size_t j = 0; j < toks.size(); ++j) {
      if (j != i) refs.push_back(toks[j]);
    }
    sum += bleu(toks[i], refs, max_n);
  }
  return sum / static_cast<double>(toks.size());
}

// ---------------------------------------------------------------------------

bool dominates(const ParetoPoint& p, const ParetoPoint& q) noexcept {
  return p.budget_k <= q.budget_k && p.pass_rate >= q.pass_rate &&
         (p.budget_k < q.budget_k || p.pass_rate > q.pass_rate);
}

std::vector<ParetoPoint> pareto_frontier(std::span<const ParetoPoint> points) {
  std::vector<ParetoPoint> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < points.size() && keep; ++j) {
      if (j != i && dominates(points[j], points[i])) keep = false;
    }
    for (std::size_t j = 0; j < i && keep; ++j) {
      if (points[j] == points[i]) keep = false;
    }
    if (keep) out.push_back(points[i]);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ParetoPoint& a, const ParetoPoint& b) { return a.budget_k < b.budget_k; });
  return out;
}

std::vector<ParetoPoint> pass_curve(std::span<const Trajectory> trajs, int k_max) {
  std::vector<ParetoPoint> out;
  for (int k = 1; k <= k_max; ++k) out.push_back({k, pass_at_u_k(trajs, k)});
  return out;
}

double frontier_value_at(std::span<const ParetoPoint> frontier, int k) noexcept {
  double best = 0.0;
  for (const auto& p : frontier) {
    if (p.budget_k <= k) best = std::max(best, p.pass_rate);
  }
  return best;
}

bool weakly_dominates(std::span<const ParetoPoint> a, std::span<const ParetoPoint> b, int k_max) noexcept {
  for (int k = 1; k <= k_max; ++k) {
    if (frontier_value_at(a, k) < frontier_value_at(b, k)) return false;
  }
  return true;
}

double reward_translation_rate(double train_score, double eval_score) {
  if (!(train_score > 0.0)) throw ZeroTrainScore();
  return eval_score / train_score;
}

// ---------------------------------------------------------------------------

EvalReport evaluate(std::span<const Trajectory> trajs, int k_max) {
  if (trajs.empty()) throw EmptySet();
  EvalReport r;
  for (int k = 1; k <= k_max; ++k) r.pass_at_u[k] = pass_at_u_k(trajs, k);
  r.ur = user_involvement_rate(trajs);
  r.score = mean_score(trajs);
  r.exploration_ratio = exploration_ratio(trajs);
  r.success_rate = success_rate(trajs);
  r.n_trajectories = trajs.size();
  if (trajs.size() >= 2) {
    std::vector<std::string> texts;
    for (const auto& t : trajs) {
      std::string s;
      for (const auto& turn : t.turns) {
        if (!s.empty()) s.push_back(' ');
        s += turn.action.content;
      }
      texts.push_back(std::move(s));
    }
    r.self_bleu = self_bleu(texts);
  }
  return r;
}

std::string report_to_json(const EvalReport& r, const std::map<std::string, std::string>& config) {
  nlohmann::ordered_json j;
  j["n_trajectories"] = r.n_trajectories;
  nlohmann::ordered_json pass = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.pass_at_u) pass[std::to_string(k)] = v;
  j["pass_at_u"] = std::move(pass);
  j["success_rate"] = r.success_rate;
  j["ur"] = r.ur;
  j["score"] = r.score;
  j["exploration_ratio"] = r.exploration_ratio;
  j["self_bleu"] = r.self_bleu ? nlohmann::ordered_json(*r.self_bleu) : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  j["config"] = std::move(cfg);
  return j.dump(2);
}

std::string frontier_csv(std::span<const ParetoPoint> frontier) {
  std::string out = "k,pass_rate\n";
  for (const auto& p : frontier) out += std::to_string(p.budget_k) + "," + text::fixed6(p.pass_rate) + "\n";
  return out;
}

}  // namespace proact::metrics
