// Acceptance checks A1..A10. One PASS/FAIL line each; exit status 1 if any
// check fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "proact/agents.hpp"
#include "proact/env_turtle.hpp"
#include "proact/grpo.hpp"
#include "proact/metrics.hpp"
#include "proact/rng.hpp"
#include "proact/shaping.hpp"
#include "proact/suite.hpp"
#include "proact/text.hpp"
#include "proact/trajectory_io.hpp"

using namespace proact;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Trajectory random_traj(Rng& rng, int T) {
  Trajectory t;
  t.task_id = "function/0";
  t.context_digest = "0000000000000000";
  t.budget_T = T;
  const int len = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(T)));
  for (int i = 0; i < len; ++i) {
    Turn turn;
    turn.index = i + 1;
    turn.action = {static_cast<ActionKind>(rng.index(3)), "x"};
    turn.raw_reward = rng.bernoulli(0.3) ? rng.uniform() : 0.0;
    turn.shaped_reward = turn.raw_reward;
    t.turns.push_back(turn);
  }
  const auto r = rng.index(3);
  t.terminated_by = r == 0 ? Termination::Success : (r == 1 ? Termination::AgentStop : Termination::BudgetExhausted);
  return t;
}

Trajectory play(const EnvSuite& suite, std::string_view agent, std::string_view env_name, std::uint64_t seed,
                std::shared_ptr<const PolicyParams> theta = nullptr) {
  auto env = suite.make(env_name);
  auto a = agents::make_agent(agent, env_name, suite, derive_seed(seed, "agent", 0), std::move(theta));
  return run_episode(*env, *a, {default_budget(env_name), seed});
}

// ---------------------------------------------------------------------------

Outcome a1_gradient() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (int c = 0; c < 20; ++c) {
    PolicyParams theta(kNumTemplates, kNumFeatures);
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta.data()[i] = 0.5 * rng.normal();
    std::vector<grpo::SurrogateTerm> terms;
    const int n = 4 + static_cast<int>(rng.index(28));
    for (int i = 0; i < n; ++i) {
      FeatureVector phi(kNumFeatures);
      phi(0) = 1.0;
      for (int f = 1; f < kNumFeatures; ++f) phi(f) = rng.uniform();
      const int a = static_cast<int>(rng.index(kNumTemplates));
      // Sampling policy near theta so that some ratios clip and some do not.
      const double old = log_prob(theta, phi, a) + rng.uniform(-0.4, 0.4);
      terms.push_back({phi, a, old, rng.normal()});
    }
    const double eps = 0.2;
    const auto s = grpo::clipped_surrogate(theta, terms, eps);
    PolicyParams fd(theta.rows(), theta.cols());
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      PolicyParams tp = theta, tm = theta;
      tp.data()[i] += h;
      tm.data()[i] -= h;
      fd.data()[i] = (grpo::clipped_surrogate(tp, terms, eps).loss - grpo::clipped_surrogate(tm, terms, eps).loss) /
                     (2 * h);
    }
    const double denom = std::max({s.gradient.norm(), fd.norm(), 1e-12});
    worst = std::max(worst, (s.gradient - fd).norm() / denom);
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && secs < 10.0, fmt("max relative error %.3e over 20 configs, %.2fs", worst, secs)};
}

Outcome a2_advantages() {
  Rng rng(202);
  grpo::GrpoConfig unit;
  unit.gamma = 1.0;  // G_1 is then the trajectory total
  double worst_mean = 0.0, worst_std = 0.0;
  int degenerate = 0, nondegenerate = 0;
  bool degenerate_ok = true, turnwise_ok = true;
  for (int g = 0; g < 1000; ++g) {
    grpo::RolloutGroup group;
    group.task_id = "function/0";
    const bool make_degenerate = g % 10 == 0;
    const double shared = rng.uniform();
    for (int i = 0; i < 8; ++i) {
      Trajectory t = random_traj(rng, 15);
      if (make_degenerate) {
        t.turns.resize(1);
        t.turns[0].shaped_reward = shared;
      } else {
        for (auto& turn : t.turns) turn.shaped_reward = rng.normal();
      }
      group.trajectories.push_back(std::move(t));
    }
    const auto adv = grpo::group_advantages(group, unit);
    if (adv.degenerate) {
      ++degenerate;
      for (const auto& a : adv.advantages) degenerate_ok = degenerate_ok && a.size() == 1 && a[0] == 0.0;
      continue;
    }
    if (adv.std <= 1e-8) continue;
    ++nondegenerate;
    double m = 0.0;
    for (const auto& a : adv.advantages) m += a[0];
    m /= 8.0;
    double v = 0.0;
    for (const auto& a : adv.advantages) v += (a[0] - m) * (a[0] - m);
    worst_mean = std::max(worst_mean, std::abs(m));
    worst_std = std::max(worst_std, std::abs(std::sqrt(v / 8.0) - 1.0));
    // Discounted turn-level credit with the default gamma.
    const auto disc = grpo::group_advantages(group, grpo::GrpoConfig{});
    for (std::size_t i = 0; i < group.trajectories.size(); ++i) {
      std::vector<double> r;
      for (const auto& turn : group.trajectories[i].turns) r.push_back(turn.shaped_reward);
      const auto G = grpo::reward_to_go(r, 0.8);
      for (std::size_t t = 0; t < G.size(); ++t) {
        turnwise_ok = turnwise_ok && std::abs(disc.advantages[i][t] - (G[t] - disc.mean) / disc.std) <= 1e-12;
      }
    }
  }
  const bool pass = worst_mean <= 1e-9 && worst_std <= 1e-9 && degenerate_ok && turnwise_ok && degenerate == 100;
  return {pass, fmt("max |mean| %.2e, max |std-1| %.2e over %d groups; %d degenerate groups all-zero=%s", worst_mean,
                    worst_std, nondegenerate, degenerate, degenerate_ok ? "yes" : "no")};
}

Outcome a3_shaping() {
  Rng rng(303);
  int mismatches = 0, exempt = 0, penalized = 0;
  for (int i = 0; i < 1000; ++i) {
    const int T = 1 + static_cast<int>(rng.index(20));
    const Trajectory t = random_traj(rng, T);
    const ShapingConfig cfg{rng.uniform(0, 1), rng.uniform(0, 1)};
    const Trajectory s = shape(t, cfg, T);
    const int used = static_cast<int>(t.turns.size());
    const bool think = !t.succeeded() && used < T;
    const double think_pen = think ? cfg.lambda_think * static_cast<double>(T - used) / used : 0.0;
    if (t.succeeded()) ++exempt;
    if (think) ++penalized;
    for (std::size_t k = 0; k < t.turns.size(); ++k) {
      double want = t.turns[k].raw_reward;
      if (k > 0 && is_user_involved(t.turns[k].action.kind) && is_user_involved(t.turns[k - 1].action.kind)) {
        want -= cfg.lambda_ans;
      }
      if (think) want -= think_pen;
      if (s.turns[k].shaped_reward != want || s.turns[k].raw_reward != t.turns[k].raw_reward) ++mismatches;
    }
    if (raw_return(s) != raw_return(t)) ++mismatches;
  }
  return {mismatches == 0, fmt("%d mismatches; %d success-exempt, %d over-thinking-penalized trajectories", mismatches,
                               exempt, penalized)};
}

Outcome a4_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  EnvSuite suite = EnvSuite::defaults();
  suite.function_max_depth = 2;
  int ok = 0;
  const int n = 100;
  for (int s = 0; s < n; ++s) {
    const auto t = play(suite, "behavioral", "function", static_cast<std::uint64_t>(s));
    ok += t.succeeded() && user_action_count(t) == 1 && t.size() <= 15;
  }
  const double rate = ok / static_cast<double>(n);
  const double secs = seconds_since(t0);
  return {rate >= 0.95 && secs < 60.0, fmt("success with one Answer %.3f over %d contexts, %.2fs", rate, n, secs)};
}

struct RunSummary {
  double ur = 0.0;
  double score = 0.0;
  std::vector<metrics::ParetoPoint> frontier;
};

Outcome a5_pareto() {
  const auto t0 = std::chrono::steady_clock::now();
  const EnvSuite suite = EnvSuite::defaults();
  const grpo::GrpoConfig cfg;
  const int budget = default_budget("function");
  const int eval_tasks = 64;

  auto run = [&](const ShapingConfig& shaping) {
    std::vector<Trajectory> evals;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      grpo::TrainOptions opts;
      opts.env = "function";
      opts.epochs = 30;
      opts.episodes_per_epoch = 128;
      opts.seed = seed;
      const auto result = grpo::train(zero_policy(), suite, cfg, shaping, opts);
      auto theta = std::make_shared<const PolicyParams>(result.theta);
      for (int j = 0; j < eval_tasks; ++j) {
        const std::uint64_t task = 1'000'000 + static_cast<std::uint64_t>(j);
        auto env = suite.make("function");
        auto agent = agents::make_agent("trainable", "function", suite, derive_seed(seed, "eval", task), theta);
        evals.push_back(run_episode(*env, *agent, {budget, task}));
      }
    }
    RunSummary r;
    r.ur = metrics::user_involvement_rate(evals);
    r.score = metrics::mean_score(evals);
    r.frontier = metrics::pareto_frontier(metrics::pass_curve(evals, budget));
    return r;
  };

  const RunSummary reg = run({0.1, 0.1});
  const RunSummary base = run(ShapingConfig::disabled());
  const double secs = seconds_since(t0);
  const bool ur_ok = reg.ur <= 0.8 * base.ur;
  const bool score_ok = reg.score >= base.score - 0.05;
  const bool frontier_ok = metrics::weakly_dominates(reg.frontier, base.frontier, budget);
  return {ur_ok && score_ok && frontier_ok && secs < 300.0,
          fmt("UR %.4f vs %.4f (%.1f%% lower), Score %.4f vs %.4f, frontier dominates=%s, %.1fs", reg.ur, base.ur,
              base.ur > 0 ? 100.0 * (1.0 - reg.ur / base.ur) : 0.0, reg.score, base.score,
              frontier_ok ? "yes" : "no", secs)};
}

Outcome a6_ablation() {
  const EnvSuite suite = EnvSuite::defaults();
  std::vector<Trajectory> naive, behav;
  for (std::uint64_t s = 0; s < 100; ++s) {
    naive.push_back(play(suite, "naive", "function", s));
    behav.push_back(play(suite, "behavioral", "function", s));
  }
  const double pn = metrics::pass_at_u_k(naive, 1), pb = metrics::pass_at_u_k(behav, 1);
  const double un = metrics::user_involvement_rate(naive), ub = metrics::user_involvement_rate(behav);
  return {pb > pn && un > ub, fmt("Pass@U-1 behavioral %.3f vs naive %.3f; UR naive %.3f vs behavioral %.3f", pb, pn,
                                  un, ub)};
}

Outcome a7_once_only() {
  auto pack = std::make_shared<const turtle::StoryPack>(turtle::default_stories());
  bool resubmit_ok = true;
  for (std::size_t i = 0; i < pack->size(); ++i) {
    std::uint64_t seed = 0;
    while (turtle::TurtleGym::story_index(seed, pack->size()) != i) ++seed;
    for (auto mode : {turtle::JudgeMode::Strict, turtle::JudgeMode::Leaky}) {
      turtle::TurtleGym env(pack, mode);
      env.reset(seed);
      std::string full;
      for (const auto& c : env.story().rubric) {
        for (const auto& s : c.required_stems) full += s + " ";
      }
      const auto first = env.step(answer(full));
      const auto second = env.step(answer(full));
      resubmit_ok = resubmit_ok && std::abs(first.reward - 1.0) <= 1e-12 && second.reward == 0.0;
    }
  }
  Rng rng(707);
  double worst = 0.0;
  const std::vector<std::string> noise = {"the", "man", "because", "water", "night", "door", "paper"};
  for (int c = 0; c < 1000; ++c) {
    const auto mode = rng.bernoulli(0.5) ? turtle::JudgeMode::Strict : turtle::JudgeMode::Leaky;
    turtle::TurtleGym env(pack, mode);
    env.reset(rng.next_u64());
    std::vector<std::string> stems;
    for (const auto& comp : env.story().rubric) stems.insert(stems.end(), comp.required_stems.begin(), comp.required_stems.end());
    double total = 0.0;
    const int turns = 1 + static_cast<int>(rng.index(15));
    for (int t = 0; t < turns; ++t) {
      std::string a;
      const int words = 1 + static_cast<int>(rng.index(8));
      for (int w = 0; w < words; ++w) {
        a += (rng.bernoulli(0.6) ? stems[rng.index(stems.size())] : noise[rng.index(noise.size())]) + " ";
      }
      total += env.step(rng.bernoulli(0.8) ? answer(a) : query(a)).reward;
    }
    worst = std::max(worst, total);
  }
  return {resubmit_ok && worst <= 1.0 + 1e-12,
          fmt("resubmission rewards zero=%s; max cumulative reward %.15f over 1000 fuzzed sequences",
              resubmit_ok ? "yes" : "no", worst)};
}

Outcome a8_metric_laws() {
  Rng rng(808);
  int violations = 0;
  for (int s = 0; s < 1000; ++s) {
    std::vector<Trajectory> ts;
    const std::size_t n = 1 + rng.index(20);
    for (std::size_t i = 0; i < n; ++i) {
      Trajectory t = random_traj(rng, 15);
      if (t.succeeded()) {
        t.turns.back().action.kind = ActionKind::Answer;
        t.turns.back().raw_reward = 1.0;
      }
      ts.push_back(std::move(t));
    }
    for (int k = 1; k < 15; ++k) violations += metrics::pass_at_u_k(ts, k) > metrics::pass_at_u_k(ts, k + 1);
    violations += metrics::pass_at_u_k(ts, 15) != metrics::success_rate(ts);
    const double ur = metrics::user_involvement_rate(ts);
    violations += ur < 0.0 || ur > 1.0;
  }
  for (int s = 0; s < 1000; ++s) {
    std::vector<metrics::ParetoPoint> pts;
    const std::size_t n = 1 + rng.index(20);
    for (std::size_t i = 0; i < n; ++i) {
      pts.push_back({1 + static_cast<int>(rng.index(8)), static_cast<double>(rng.index(9)) / 8.0});
    }
    const auto f = metrics::pareto_frontier(pts);
    for (const auto& a : f) {
      for (const auto& b : f) violations += metrics::dominates(a, b);
    }
    for (const auto& p : pts) {
      bool dominated = false;
      for (const auto& q : pts) dominated = dominated || metrics::dominates(q, p);
      violations += dominated == (std::find(f.begin(), f.end(), p) != f.end());
    }
  }
  const std::vector<std::string> dup = {"he went back to the office", "he went back to the office"};
  const std::vector<std::string> disjoint = {"alpha beta gamma delta", "one two three four"};
  const double bd = metrics::self_bleu(dup), bj = metrics::self_bleu(disjoint);
  const bool bleu_ok = std::abs(bd - 1.0) <= 1e-12 && bj <= 1e-8;
  return {violations == 0 && bleu_ok,
          fmt("%d law violations; self-BLEU duplicates %.12f, disjoint %.3e", violations, bd, bj)};
}

Outcome a9_rtr() {
  EnvSuite leaky = EnvSuite::defaults();
  leaky.judge = turtle::JudgeMode::Leaky;
  EnvSuite strict = EnvSuite::defaults();
  strict.judge = turtle::JudgeMode::Strict;
  auto score = [](const EnvSuite& suite, std::string_view agent) {
    std::vector<Trajectory> ts;
    for (std::uint64_t s = 0; s < 60; ++s) ts.push_back(play(suite, agent, "turtle", s));
    return metrics::mean_score(ts);
  };
  const double kw_train = score(leaky, "keyword"), kw_eval = score(strict, "keyword");
  const double bh_train = score(leaky, "behavioral"), bh_eval = score(strict, "behavioral");
  if (kw_train <= 0.0 || bh_train <= 0.0) return {false, "zero training score"};
  const double kw = metrics::reward_translation_rate(kw_train, kw_eval);
  const double bh = metrics::reward_translation_rate(bh_train, bh_eval);
  return {kw < 1.0 && bh > kw, fmt("RTR keyword %.3f (%.3f/%.3f), behavioral %.3f (%.3f/%.3f)", kw, kw_eval, kw_train,
                                   bh, bh_eval, bh_train)};
}

Outcome a10_replay() {
  const EnvSuite suite = EnvSuite::defaults();
  Rng rng(1010);
  int mismatches = 0, episodes = 0;
  PolicyParams theta = zero_policy();
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta.data()[i] = rng.normal();
  auto shared = std::make_shared<const PolicyParams>(theta);
  for (const auto& env_name : env_names()) {
    for (int k = 0; k < 30; ++k) {
      const std::uint64_t seed = rng.next_u64() >> 11;
      for (const std::string agent : {"naive", "behavioral", "trainable"}) {
        const Trajectory original = play(suite, agent, env_name, seed, shared);
        const std::string line = to_jsonl(shape(original, {0.1, 0.1}));
        const Trajectory parsed = from_jsonl(line);
        std::vector<ActionRecord> actions;
        for (const auto& t : parsed.turns) actions.push_back(t.action);
        agents::ReplayAgent replay(actions);
        auto env = suite.make(env_name);
        const Trajectory again = run_episode(*env, replay, {parsed.budget_T, parse_task_id(parsed.task_id)->seed});
        mismatches += to_jsonl(shape(again, {0.1, 0.1})) != line;
        ++episodes;
      }
    }
  }
  return {mismatches == 0, fmt("%d of %d replays differ", mismatches, episodes)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> checks = {
      {"A1", a1_gradient},       {"A2", a2_advantages}, {"A3", a3_shaping},     {"A4", a4_oracle},
      {"A5", a5_pareto},         {"A6", a6_ablation},   {"A7", a7_once_only},   {"A8", a8_metric_laws},
      {"A9", a9_rtr},            {"A10", a10_replay},
  };
  int failed = 0;
  for (const auto& [id, fn] : checks) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
