#include "proact/env_function.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "proact/errors.hpp"
#include "proact/rng.hpp"
#include "proact/text.hpp"

namespace proact::function_gym {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// NaN marks an evaluation error and propagates through every operator.
inline double apply(Op op, double l, double r) noexcept {
  switch (op) {
    case Op::Add: return l + r;
    case Op::Sub: return l - r;
    case Op::Mul: return l * r;
    case Op::Div: return r == 0.0 ? kNaN : l / r;
    case Op::Pow: return r == 2.0 ? l * l : l * l * l;
  }
  return kNaN;
}

constexpr std::array<Op, 4> kPlainOps = {Op::Add, Op::Sub, Op::Mul, Op::Div};

}  // namespace

char op_symbol(Op op) noexcept {
  switch (op) {
    case Op::Add: return '+';
    case Op::Sub: return '-';
    case Op::Mul: return '*';
    case Op::Div: return '/';
    case Op::Pow: return '^';
  }
  return '?';
}

ExprTree ExprTree::var(int index) {
  if (index < 1 || index > 4) throw std::invalid_argument("variable index must be in 1..4");
  ExprTree t;
  t.nodes_.push_back({Node::Kind::Var, Op::Add, index});
  t.var_mask_ = 1u << (index - 1);
  return t;
}

ExprTree ExprTree::constant(int value) {
  ExprTree t;
  t.nodes_.push_back({Node::Kind::Const, Op::Add, value});
  return t;
}

ExprTree ExprTree::binary(Op op, const ExprTree& left, const ExprTree& right) {
  if (op == Op::Pow) {
    const auto& r = right.nodes_;
    if (r.size() != 1 || r[0].kind != Node::Kind::Const || (r[0].value != 2 && r[0].value != 3)) {
      throw std::invalid_argument("exponent must be the constant 2 or 3");
    }
  }
  ExprTree t;
  t.nodes_.reserve(left.nodes_.size() + right.nodes_.size() + 1);
  t.nodes_.insert(t.nodes_.end(), left.nodes_.begin(), left.nodes_.end());
  t.nodes_.insert(t.nodes_.end(), right.nodes_.begin(), right.nodes_.end());
  t.nodes_.push_back({Node::Kind::Binary, op, 0});
  t.depth_ = 1 + std::max(left.depth_, right.depth_);
  t.var_mask_ = left.var_mask_ | right.var_mask_;
  return t;
}

int ExprTree::distinct_vars() const noexcept { return std::popcount(var_mask_); }

std::string ExprTree::to_string() const {
  std::vector<std::string> stack;
  for (const auto& n : nodes_) {
    switch (n.kind) {
      case Node::Kind::Var: stack.push_back("x" + std::to_string(n.value)); break;
      case Node::Kind::Const: stack.push_back(std::to_string(n.value)); break;
      case Node::Kind::Binary: {
        std::string r = std::move(stack.back());
        stack.pop_back();
        std::string l = std::move(stack.back());
        stack.back() = "(" + l + " " + op_symbol(n.op) + " " + r + ")";
        break;
      }
    }
  }
  return stack.empty() ? std::string() : stack.back();
}

std::optional<double> ExprTree::try_eval(const Input& x) const {
  double stack[32];
  int top = 0;
  for (const auto& n : nodes_) {
    switch (n.kind) {
      case Node::Kind::Var: stack[top++] = x[static_cast<std::size_t>(n.value - 1)]; break;
      case Node::Kind::Const: stack[top++] = n.value; break;
      case Node::Kind::Binary: {
        const double r = stack[--top];
        const double l = stack[top - 1];
        stack[top - 1] = apply(n.op, l, r);
        break;
      }
    }
  }
  if (top != 1 || std::isnan(stack[0])) return std::nullopt;
  return stack[0];
}

double eval_expr(const ExprTree& f, const Input& x) {
  auto v = f.try_eval(x);
  if (!v) throw DivisionByZero();
  return *v;
}

namespace {

ExprTree random_leaf(Rng& rng) {
  if (rng.bernoulli(0.6)) return ExprTree::var(static_cast<int>(rng.uniform_int(1, 4)));
  return ExprTree::constant(static_cast<int>(rng.uniform_int(kMinConst, kMaxConst)));
}

ExprTree random_tree(Rng& rng, int depth_left, bool force_op) {
  if (depth_left <= 1 || (!force_op && rng.bernoulli(0.25))) return random_leaf(rng);
  const auto op = static_cast<Op>(rng.uniform_int(0, 4));
  ExprTree left = random_tree(rng, depth_left - 1, false);
  if (op == Op::Pow) {
    return ExprTree::binary(op, left, ExprTree::constant(static_cast<int>(rng.uniform_int(2, 3))));
  }
  return ExprTree::binary(op, left, random_tree(rng, depth_left - 1, false));
}

}  // namespace

FunctionContext generate_function(std::uint64_t seed, int max_depth) {
  if (max_depth < 1 || max_depth > 3) throw std::invalid_argument("max_depth must be in [1, 3]");
  Rng rng(derive_seed(seed, "function-gym", 0));
  for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
    ExprTree f = random_tree(rng, max_depth, true);
    Input x{};
    for (auto& v : x) v = static_cast<double>(rng.uniform_int(-kInputRange, kInputRange));
    if (f.distinct_vars() < 2) continue;
    auto y = f.try_eval(x);
    if (!y || !std::isfinite(*y)) continue;
    return FunctionContext{std::move(f), x, kFunctionBudget};
  }
  throw GenerationExhausted("no valid function after " + std::to_string(kMaxGenerationAttempts) +
                            " samples at max_depth " + std::to_string(max_depth));
}

bool output_matches(std::optional<double> predicted, double observed) noexcept {
  if (std::isnan(observed)) return !predicted.has_value();
  if (!predicted) return false;
  return std::abs(*predicted - observed) <= 1e-6 * std::max(1.0, std::abs(observed));
}

namespace {

struct Level {
  std::vector<ExprTree> trees;
  std::vector<double> values;  // trees.size() x probes, row major
};

bool matches_value(double v, double observed) noexcept {
  if (std::isnan(observed)) return std::isnan(v);
  if (std::isnan(v)) return false;
  return std::abs(v - observed) <= 1e-6 * std::max(1.0, std::abs(observed));
}

// Builds every tree of depth < max_depth with its probe values; the top
// level is checked on the fly so it never needs to be materialized.
template <class Visit>
void walk_grammar(std::span<const Probe> probes, int max_depth, Visit&& visit) {
  const std::size_t np = probes.size();
  std::vector<ExprTree> trees;
  std::vector<double> values;
  std::vector<int> depth_start;  // first index of each exact depth

  auto push = [&](ExprTree t, const double* v) {
    trees.push_back(std::move(t));
    values.insert(values.end(), v, v + np);
  };

  std::vector<double> buf(np);
  depth_start.push_back(0);
  for (int i = 1; i <= 4; ++i) {
    for (std::size_t p = 0; p < np; ++p) buf[p] = probes[p].input[static_cast<std::size_t>(i - 1)];
    push(ExprTree::var(i), buf.data());
  }
  for (int c = kMinConst; c <= kMaxConst; ++c) {
    for (std::size_t p = 0; p < np; ++p) buf[p] = c;
    push(ExprTree::constant(c), buf.data());
  }
  for (std::size_t i = 0; i < trees.size(); ++i) visit(trees[i], &values[i * np]);

  const ExprTree exponents[2] = {ExprTree::constant(2), ExprTree::constant(3)};
  for (int d = 2; d <= max_depth; ++d) {
    const std::size_t prev_begin = static_cast<std::size_t>(depth_start.back());
    const std::size_t prev_end = trees.size();
    const bool top = d == max_depth;
    depth_start.push_back(static_cast<int>(prev_end));

    auto emit = [&](Op op, std::size_t l, const ExprTree& rt, const double* rv) {
      const double* lv = &values[l * np];
      if (top) {
        // Cheap rejection before building the tree.
        for (std::size_t p = 0; p < np; ++p) {
          if (!matches_value(apply(op, lv[p], rv[p]), probes[p].output)) return;
        }
        visit(ExprTree::binary(op, trees[l], rt), nullptr);
      } else {
        for (std::size_t p = 0; p < np; ++p) buf[p] = apply(op, lv[p], rv[p]);
        ExprTree t = ExprTree::binary(op, trees[l], rt);
        visit(t, buf.data());
        push(std::move(t), buf.data());
      }
    };

    for (Op op : kPlainOps) {
      for (std::size_t l = 0; l < prev_end; ++l) {
        for (std::size_t r = 0; r < prev_end; ++r) {
          if (l < prev_begin && r < prev_begin) continue;  // depth would be < d
          emit(op, l, trees[r], &values[r * np]);
        }
      }
    }
    for (std::size_t l = prev_begin; l < prev_end; ++l) {
      for (const auto& e : exponents) {
        std::vector<double> ev(np, static_cast<double>(e.nodes()[0].value));
        emit(Op::Pow, l, e, ev.data());
      }
    }
  }
}

}  // namespace

std::vector<ExprTree> enumerate_hypotheses(std::span<const Probe> probes, int max_depth) {
  if (max_depth < 1 || max_depth > 3) throw std::invalid_argument("max_depth must be in [1, 3]");
  std::vector<ExprTree> out;
  walk_grammar(probes, max_depth, [&](const ExprTree& t, const double* v) {
    if (t.distinct_vars() < 2) return;
    if (v != nullptr) {
      for (std::size_t p = 0; p < probes.size(); ++p) {
        if (!matches_value(v[p], probes[p].output)) return;
      }
    }
    out.push_back(t);
  });
  return out;
}

std::size_t grammar_size(int max_depth) {
  // With no probes every tree is consistent.
  return enumerate_hypotheses({}, max_depth).size();
}

std::vector<Input> canonical_probes() {
  std::vector<Input> out;
  out.push_back({1, 1, 1, 1});
  for (std::size_t i = 0; i < 4; ++i) {
    Input x{1, 1, 1, 1};
    x[i] = 2;
    out.push_back(x);
  }
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      Input x{1, 1, 1, 1};
      x[i] = 2;
      x[j] = 2;
      out.push_back(x);
    }
  }
  return out;
}

std::string format_input(const Input& x) {
  std::string out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) out.push_back(' ');
    out += text::shortest(x[i]);
  }
  return out;
}

FunctionGym::FunctionGym(int max_depth) : max_depth_(max_depth) {
  if (max_depth < 1 || max_depth > 3) throw std::invalid_argument("max_depth must be in [1, 3]");
}

std::string FunctionGym::intro() {
  return "Infer the hidden function f(x1, x2, x3, x4). action: four numbers to probe f; "
         "search: reveals the test input; answer: the value of f at the test input.";
}

std::string FunctionGym::reset(std::uint64_t seed) {
  set_context(generate_function(seed, max_depth_), seed);
  return intro();
}

void FunctionGym::set_context(FunctionContext ctx, std::uint64_t seed) {
  seed_ = seed;
  ctx_ = std::move(ctx);
  target_ = eval_expr(ctx_.f, ctx_.test_input);
}

StepResult FunctionGym::step(const ActionRecord& action) {
  switch (action.kind) {
    case ActionKind::Query: {
      auto nums = text::parse_numbers(action.content, 4);
      if (!nums) return {"parse error: expected four numbers", 0.0, false};
      const Input x{(*nums)[0], (*nums)[1], (*nums)[2], (*nums)[3]};
      if (x == ctx_.test_input) return {std::string(kProbeTestInputObservation), 0.0, false};
      auto y = ctx_.f.try_eval(x);
      if (!y) return {std::string(kDivisionByZeroObservation), 0.0, false};
      return {text::fixed6(*y), 0.0, false};
    }
    case ActionKind::Search:
      return {"test input: " + format_input(ctx_.test_input), 0.0, false};
    case ActionKind::Answer: {
      auto nums = text::parse_numbers(action.content, 1);
      if (!nums) return {"parse error: expected one number", 0.0, false};
      const double a = (*nums)[0];
      if (std::abs(a - target_) <= 1e-6 * std::max(1.0, std::abs(target_))) {
        return {"correct", 1.0, true};
      }
      return {"incorrect", 0.0, false};
    }
  }
  return {"invalid action", 0.0, false};
}

std::uint64_t FunctionGym::context_hash() const {
  return fnv1a64(ctx_.f.to_string() + "|" + format_input(ctx_.test_input));
}

}  // namespace proact::function_gym
