// proact: generate tasks, roll out agents, train, evaluate, serve, replay.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "proact/agents.hpp"
#include "proact/config.hpp"
#include "proact/errors.hpp"
#include "proact/grpo.hpp"
#include "proact/metrics.hpp"
#include "proact/server.hpp"
#include "proact/suite.hpp"
#include "proact/text.hpp"
#include "proact/trajectory_io.hpp"

using namespace proact;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to `path`, or stdout when it is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::trunc);
      if (!file_) throw Error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct SuiteFlags {
  std::string kb;
  std::string stories;
  std::string judge = "strict";
  int depth = function_gym::kDefaultMaxDepth;

  void add(CLI::App* app) {
    app->add_option("--kb", kb, "Telepathy knowledge base JSON");
    app->add_option("--stories", stories, "Turtle story pack JSON");
    app->add_option("--judge", judge, "Turtle judge")->check(CLI::IsMember({"strict", "leaky"}));
    app->add_option("--depth", depth, "Function-Gym maximum expression depth")->check(CLI::Range(1, 3));
  }

  EnvSuite build() const {
    EnvSuite s = EnvSuite::defaults();
    s.function_max_depth = depth;
    if (!kb.empty()) {
      auto parsed = telepathy::kb_from_json(read_file(kb));
      telepathy::validate(parsed);
      s.kb = std::make_shared<const telepathy::EntityKB>(std::move(parsed));
    }
    if (!stories.empty()) s.stories = std::make_shared<const turtle::StoryPack>(turtle::stories_from_json(read_file(stories)));
    s.judge = judge == "leaky" ? turtle::JudgeMode::Leaky : turtle::JudgeMode::Strict;
    return s;
  }

  void echo(std::map<std::string, std::string>& out) const {
    out["depth"] = std::to_string(depth);
    out["judge"] = judge;
    if (!kb.empty()) out["kb"] = kb;
    if (!stories.empty()) out["stories"] = stories;
  }
};

const auto kEnvCheck = CLI::IsMember({"function", "telepathy", "turtle"});

// ---------------------------------------------------------------------------

struct GenTasks {
  std::string env = "function";
  std::uint64_t seed = 0;
  int episodes = 100;
  std::string out;
  SuiteFlags suite;
};

int run_gen_tasks(const GenTasks& o) {
  const EnvSuite suite = o.suite.build();
  Output out(o.out);
  auto env = suite.make(o.env);
  for (int j = 0; j < o.episodes; ++j) {
    const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(j);
    env->reset(seed);
    nlohmann::ordered_json line;
    line["task_id"] = make_task_id(o.env, seed);
    line["env"] = o.env;
    line["seed"] = seed;
    line["budget_T"] = env->default_budget();
    line["context_digest"] = text::hex64(env->context_hash());
    out.stream() << line.dump() << '\n';
  }
  return 0;
}

struct Rollout {
  std::string env = "function";
  std::string agent = "behavioral";
  std::uint64_t seed = 0;
  int episodes = 10;
  int budget = 0;
  double lambda_ans = 0.0;
  double lambda_think = 0.0;
  std::string policy;
  std::string out;
  SuiteFlags suite;
};

int run_rollout(const Rollout& o) {
  const EnvSuite suite = o.suite.build();
  const ShapingConfig shaping{o.lambda_ans, o.lambda_think};
  shaping.validate();
  std::shared_ptr<const PolicyParams> theta;
  if (!o.policy.empty()) theta = std::make_shared<const PolicyParams>(grpo::load_checkpoint(o.policy).theta);
  Output out(o.out);
  auto env = suite.make(o.env);
  const int budget = o.budget > 0 ? o.budget : env->default_budget();
  for (int j = 0; j < o.episodes; ++j) {
    const std::uint64_t task = o.seed + static_cast<std::uint64_t>(j);
    auto agent = agents::make_agent(o.agent, o.env, suite, derive_seed(o.seed, "agent", static_cast<std::uint64_t>(j)),
                                    theta);
    const Trajectory t = run_episode(*env, *agent, {budget, task});
    out.stream() << to_jsonl(shape(t, shaping, budget)) << '\n';
  }
  return 0;
}

struct Train {
  std::string config;
  std::optional<std::string> env;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<int> episodes;
  std::optional<int> budget;
  std::optional<double> lambda_ans;
  std::optional<double> lambda_think;
  std::optional<double> gamma;
  std::optional<int> group_size;
  std::optional<double> learning_rate;
  std::string out;
  std::string curve;
  SuiteFlags suite;
};

int run_train(const Train& o) {
  Config cfg = o.config.empty() ? Config{} : Config::load(o.config);
  auto put = [&](const char* key, const auto& v) {
    if (!v) return;
    std::ostringstream ss;
    ss << *v;
    cfg.set(key, ss.str());
  };
  put("env", o.env);
  put("seed", o.seed);
  put("epochs", o.epochs);
  put("episodes", o.episodes);
  put("budget", o.budget);
  put("lambda_ans", o.lambda_ans);
  put("lambda_think", o.lambda_think);
  put("gamma", o.gamma);
  put("group_size", o.group_size);
  put("learning_rate", o.learning_rate);

  grpo::GrpoConfig g;
  g.gamma = cfg.get_double("gamma", g.gamma);
  g.clip_eps = cfg.get_double("clip_eps", g.clip_eps);
  g.group_size = static_cast<int>(cfg.get_int("group_size", g.group_size));
  g.learning_rate = cfg.get_double("learning_rate", g.learning_rate);
  const ShapingConfig shaping{cfg.get_double("lambda_ans", 0.1), cfg.get_double("lambda_think", 0.1)};
  grpo::TrainOptions opts;
  opts.env = cfg.get_string("env", "function");
  if (opts.env != "function" && opts.env != "telepathy" && opts.env != "turtle") {
    throw CLI::ValidationError("env", "unknown environment '" + opts.env + "'");
  }
  opts.epochs = static_cast<int>(cfg.get_int("epochs", opts.epochs));
  opts.episodes_per_epoch = static_cast<int>(cfg.get_int("episodes", opts.episodes_per_epoch));
  opts.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  opts.budget_T = static_cast<int>(cfg.get_int("budget", 0));
  opts.checkpoint_path = o.out;

  // Echo every effective setting, defaults included.
  std::map<std::string, std::string> echo = cfg.values();
  echo["env"] = opts.env;
  echo["epochs"] = std::to_string(opts.epochs);
  echo["episodes"] = std::to_string(opts.episodes_per_epoch);
  echo["seed"] = std::to_string(opts.seed);
  echo["budget"] = std::to_string(opts.budget_T);
  echo["gamma"] = text::shortest(g.gamma);
  echo["clip_eps"] = text::shortest(g.clip_eps);
  echo["group_size"] = std::to_string(g.group_size);
  echo["learning_rate"] = text::shortest(g.learning_rate);
  echo["lambda_ans"] = text::shortest(shaping.lambda_ans);
  echo["lambda_think"] = text::shortest(shaping.lambda_think);
  o.suite.echo(echo);
  opts.config_echo = echo;

  const auto result = grpo::train(zero_policy(), o.suite.build(), g, shaping, opts);
  const std::string csv = grpo::curve_csv(result.curve, echo);
  if (!o.curve.empty()) {
    Output c(o.curve);
    c.stream() << csv;
  }
  if (o.out.empty()) std::cout << grpo::checkpoint_to_string(result.theta, echo);
  std::cerr << "trained " << opts.epochs << " epochs";
  if (!result.curve.empty()) {
    const auto& last = result.curve.back();
    std::cerr << ": score " << text::fixed6(last.score) << ", ur " << text::fixed6(last.ur);
  }
  std::cerr << '\n';
  return 0;
}

struct Eval {
  std::string in;
  int k_max = 5;
  std::string out;
  std::string frontier;
};

int run_eval(const Eval& o) {
  std::istringstream src(read_file(o.in));
  const auto trajs = read_jsonl(src);
  const auto report = metrics::evaluate(trajs, o.k_max);
  const std::map<std::string, std::string> echo = {{"in", o.in}, {"k_max", std::to_string(o.k_max)}};
  Output out(o.out);
  out.stream() << metrics::report_to_json(report, echo) << '\n';
  if (!o.frontier.empty()) {
    Output f(o.frontier);
    f.stream() << metrics::frontier_csv(metrics::pareto_frontier(metrics::pass_curve(trajs, o.k_max)));
  }
  return 0;
}

server::Server* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

struct Serve {
  std::string host = "127.0.0.1";
  int port = 7777;
  bool stdio = false;
  std::string log;
  double lambda_ans = 0.0;
  double lambda_think = 0.0;
  int budget = 0;
  SuiteFlags suite;
};

int run_serve(const Serve& o) {
  server::SessionOptions opts{o.suite.build(), {o.lambda_ans, o.lambda_think}, o.budget};
  opts.shaping.validate();
  std::ofstream log_file;
  if (!o.log.empty()) {
    log_file.open(o.log, std::ios::app);
    if (!log_file) throw Error("cannot write " + o.log);
  }
  server::TrajectorySink sink(log_file.is_open() ? &log_file : nullptr);
  if (o.stdio) {
    server::serve_stream(std::cin, std::cout, opts, &sink);
    sink.flush();
    return 0;
  }
  server::Server srv({o.host, o.port}, std::move(opts), &sink);
  const int port = srv.bind();
  std::cerr << "listening on " << o.host << ":" << port << '\n';
  g_server = &srv;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  srv.run();
  g_server = nullptr;
  sink.flush();
  return 0;
}

struct Replay {
  std::string in;
  double lambda_ans = 0.0;
  double lambda_think = 0.0;
  SuiteFlags suite;
};

// First differing field between two trajectories, if any.
std::optional<std::string> first_difference(const Trajectory& want, const Trajectory& got) {
  const std::size_t n = std::max(want.turns.size(), got.turns.size());
  for (std::size_t t = 0; t < n; ++t) {
    const std::string where = "turn " + std::to_string(t + 1) + ": ";
    if (t >= want.turns.size() || t >= got.turns.size()) return where + "turn count differs";
    const Turn& a = want.turns[t];
    const Turn& b = got.turns[t];
    if (a.observation != b.observation) return where + "observation";
    if (a.raw_reward != b.raw_reward) return where + "raw_reward";
    if (a.shaped_reward != b.shaped_reward) return where + "shaped_reward";
  }
  if (want.terminated_by != got.terminated_by) return std::string("terminated_by");
  if (want.context_digest != got.context_digest) return std::string("context_digest");
  if (to_jsonl(want) != to_jsonl(got)) return std::string("serialized form");
  return std::nullopt;
}

int run_replay(const Replay& o) {
  const EnvSuite suite = o.suite.build();
  const ShapingConfig shaping{o.lambda_ans, o.lambda_think};
  shaping.validate();
  std::istringstream src(read_file(o.in));
  int lineno = 0, checked = 0;
  for (std::string line; std::getline(src, line);) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const Trajectory logged = from_jsonl(line);
    const auto ref = parse_task_id(logged.task_id);
    if (!ref) throw ParseError("line " + std::to_string(lineno) + ": bad task_id '" + logged.task_id + "'");
    std::vector<ActionRecord> actions;
    for (const auto& t : logged.turns) actions.push_back(t.action);
    agents::ReplayAgent agent(std::move(actions));
    auto env = suite.make(ref->env);
    const Trajectory again = shape(run_episode(*env, agent, {logged.budget_T, ref->seed}), shaping, logged.budget_T);
    if (auto diff = first_difference(logged, again)) {
      std::cerr << "replay mismatch at line " << lineno << ", " << *diff << '\n';
      return 2;
    }
    ++checked;
  }
  std::cout << "replayed " << checked << " trajectories, all identical\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proact: proactive-agent gyms, behavior-regularized GRPO and evaluation"};
  app.require_subcommand(1);

  GenTasks gen;
  auto* g = app.add_subcommand("gen-tasks", "Write a seeded task suite as JSONL");
  g->add_option("--env", gen.env)->check(kEnvCheck);
  g->add_option("--seed", gen.seed, "First task seed");
  g->add_option("--episodes", gen.episodes, "Number of tasks")->check(CLI::NonNegativeNumber);
  g->add_option("--out", gen.out, "Output file (stdout by default)");
  gen.suite.add(g);

  Rollout ro;
  auto* r = app.add_subcommand("rollout", "Play episodes and write trajectories as JSONL");
  r->add_option("--env", ro.env)->check(kEnvCheck);
  r->add_option("--agent", ro.agent)->check(CLI::IsMember(agents::agent_names()));
  r->add_option("--seed", ro.seed, "Task j uses seed + j");
  r->add_option("--episodes", ro.episodes)->check(CLI::NonNegativeNumber);
  r->add_option("--budget", ro.budget, "Turn budget (0: environment default)")->check(CLI::NonNegativeNumber);
  r->add_option("--lambda-ans", ro.lambda_ans)->check(CLI::NonNegativeNumber);
  r->add_option("--lambda-think", ro.lambda_think)->check(CLI::NonNegativeNumber);
  r->add_option("--policy", ro.policy, "Checkpoint for the trainable agent");
  r->add_option("--out", ro.out, "Output file (stdout by default)");
  ro.suite.add(r);

  Train tr;
  auto* t = app.add_subcommand("train", "Train the softmax policy with GRPO");
  t->add_option("--config", tr.config, "key = value config file; flags override it");
  t->add_option("--env", tr.env)->check(kEnvCheck);
  t->add_option("--seed", tr.seed);
  t->add_option("--epochs", tr.epochs)->check(CLI::NonNegativeNumber);
  t->add_option("--episodes", tr.episodes, "Episodes per epoch")->check(CLI::PositiveNumber);
  t->add_option("--budget", tr.budget)->check(CLI::NonNegativeNumber);
  t->add_option("--lambda-ans", tr.lambda_ans)->check(CLI::NonNegativeNumber);
  t->add_option("--lambda-think", tr.lambda_think)->check(CLI::NonNegativeNumber);
  t->add_option("--gamma", tr.gamma)->check(CLI::Range(0.0, 1.0));
  t->add_option("--group-size", tr.group_size)->check(CLI::Range(2, 1 << 20));
  t->add_option("--learning-rate", tr.learning_rate)->check(CLI::PositiveNumber);
  t->add_option("--out", tr.out, "Checkpoint path (stdout by default)");
  t->add_option("--curve", tr.curve, "Training curve CSV");
  tr.suite.add(t);

  Eval ev;
  auto* e = app.add_subcommand("eval", "Score a JSONL log");
  e->add_option("--in", ev.in)->required();
  e->add_option("--k-max", ev.k_max)->check(CLI::PositiveNumber);
  e->add_option("--out", ev.out, "Report JSON (stdout by default)");
  e->add_option("--frontier", ev.frontier, "Pareto frontier CSV");

  Serve sv;
  auto* s = app.add_subcommand("serve", "Serve the wire protocol over TCP or stdio");
  s->add_option("--host", sv.host);
  s->add_option("--port", sv.port)->check(CLI::Range(0, 65535));
  s->add_flag("--stdio", sv.stdio, "One session over stdin/stdout");
  s->add_option("--log", sv.log, "Append finished trajectories here");
  s->add_option("--lambda-ans", sv.lambda_ans)->check(CLI::NonNegativeNumber);
  s->add_option("--lambda-think", sv.lambda_think)->check(CLI::NonNegativeNumber);
  s->add_option("--budget", sv.budget)->check(CLI::NonNegativeNumber);
  sv.suite.add(s);

  Replay rp;
  auto* p = app.add_subcommand("replay", "Re-run a JSONL log and verify it byte for byte");
  p->add_option("--in", rp.in)->required();
  p->add_option("--lambda-ans", rp.lambda_ans, "Shaping the log was written with")->check(CLI::NonNegativeNumber);
  p->add_option("--lambda-think", rp.lambda_think)->check(CLI::NonNegativeNumber);
  rp.suite.add(p);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& h) {
    return app.exit(h);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 1;
  }

  try {
    if (*g) return run_gen_tasks(gen);
    if (*r) return run_rollout(ro);
    if (*t) return run_train(tr);
    if (*e) return run_eval(ev);
    if (*s) return run_serve(sv);
    if (*p) return run_replay(rp);
  } catch (const CLI::ValidationError& err) {
    std::cerr << "usage error: " << err.what() << '\n';
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
  return 1;
}
