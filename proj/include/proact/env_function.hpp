#pragma once

// Function-Gym: the agent probes a hidden four-variable arithmetic function
// and must report its value at a hidden test input.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proact/mdp.hpp"

namespace proact::function_gym {

using Input = std::array<double, 4>;

enum class Op : std::uint8_t { Add, Sub, Mul, Div, Pow };

char op_symbol(Op op) noexcept;

/// Expression over x1..x4 stored in postfix order.
class ExprTree {
 public:
  struct Node {
    enum class Kind : std::uint8_t { Var, Const, Binary };
    Kind kind = Kind::Const;
    Op op = Op::Add;
    int value = 0;  // variable index 1..4 or constant
    friend bool operator==(const Node&, const Node&) = default;
  };

  static ExprTree var(int index);
  static ExprTree constant(int value);
  /// Pow requires a Const right operand with value 2 or 3.
  static ExprTree binary(Op op, const ExprTree& left, const ExprTree& right);

  std::span<const Node> nodes() const noexcept { return nodes_; }
  /// A single leaf has depth 1.
  int depth() const noexcept { return depth_; }
  /// Bit i set when x(i+1) occurs.
  unsigned var_mask() const noexcept { return var_mask_; }
  int distinct_vars() const noexcept;

  /// Fully parenthesized infix, e.g. "((x2 + x3) ^ 2)".
  std::string to_string() const;

  /// nullopt when some divisor evaluates to zero.
  std::optional<double> try_eval(const Input& x) const;

  friend bool operator==(const ExprTree&, const ExprTree&) = default;

 private:
  std::vector<Node> nodes_;
  int depth_ = 1;
  unsigned var_mask_ = 0;
};

/// Throws DivisionByZero.
double eval_expr(const ExprTree& f, const Input& x);

inline constexpr int kFunctionBudget = 15;
inline constexpr int kDefaultMaxDepth = 3;
inline constexpr int kMinConst = 1;
inline constexpr int kMaxConst = 5;
inline constexpr int kInputRange = 9;
inline constexpr int kMaxGenerationAttempts = 10000;

struct FunctionContext {
  ExprTree f;
  Input test_input{};
  int budget_T = kFunctionBudget;
};

/// Deterministic in seed; throws GenerationExhausted when the rejection
/// sampler gives up and std::invalid_argument for max_depth outside [1, 3].
FunctionContext generate_function(std::uint64_t seed, int max_depth = kDefaultMaxDepth);

/// One observed probe. A NaN output records a division-by-zero reply.
struct Probe {
  Input input{};
  double output = 0.0;
};

/// |predicted - observed| <= 1e-6 * max(1, |observed|); NaN matches only an
/// evaluation error.
bool output_matches(std::optional<double> predicted, double observed) noexcept;

/// Every grammar tree (depth <= max_depth, at least two distinct variables)
/// consistent with all probes, in canonical enumeration order.
std::vector<ExprTree> enumerate_hypotheses(std::span<const Probe> probes, int max_depth);

/// Grammar size for a given depth bound (all trees with >= 2 variables).
std::size_t grammar_size(int max_depth);

/// All-ones, then unit probes (one variable 2, rest 1), then pairwise probes.
std::vector<Input> canonical_probes();

std::string format_input(const Input& x);

inline constexpr std::string_view kProbeTestInputObservation = "test input may not be probed";
inline constexpr std::string_view kDivisionByZeroObservation = "error: division by zero";

class FunctionGym final : public Environment {
 public:
  explicit FunctionGym(int max_depth = kDefaultMaxDepth);

  std::string_view name() const override { return "function"; }
  int default_budget() const override { return kFunctionBudget; }
  std::string reset(std::uint64_t seed) override;
  StepResult step(const ActionRecord& action) override;
  std::uint64_t context_hash() const override;

  int max_depth() const noexcept { return max_depth_; }
  const FunctionContext& context() const noexcept { return ctx_; }
  /// Installs a fixed context (tests and fixtures).
  void set_context(FunctionContext ctx, std::uint64_t seed = 0);

  static std::string intro();

 private:
  int max_depth_;
  FunctionContext ctx_;
  double target_ = 0.0;
};

}  // namespace proact::function_gym
