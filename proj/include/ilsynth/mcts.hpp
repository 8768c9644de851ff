#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ilsynth/search.hpp"

namespace ilsynth {

/// Expression under construction: a pre-order token string where `Hole`
/// stands for the non-terminal U.
class PartialExpr {
 public:
  enum class TokenKind : std::uint8_t { Hole, Var, Const, Op, Ite };
  struct Token {
    TokenKind kind;
    Op op = Op::Add;
    Word value = 0;
    friend bool operator==(const Token&, const Token&) = default;
  };

  /// The single non-terminal U.
  PartialExpr();
  explicit PartialExpr(const Expr& terminal);
  /// Prefix notation where `U` denotes a hole, e.g. "(add U v0)".
  static PartialExpr parse(std::string_view text);

  std::size_t holes() const { return holes_; }
  std::size_t operators() const { return operators_; }
  bool is_terminal() const { return holes_ == 0; }
  const std::vector<Token>& tokens() const { return tokens_; }

  /// Replaces the leftmost hole by an operator node with fresh holes.
  PartialExpr expand_operator(Op op) const;
  PartialExpr expand_ite() const;
  /// Replaces the leftmost hole by a terminal (`Var` or `Const`).
  PartialExpr expand_terminal(const Expr& leaf) const;

  Expr to_expr() const;
  std::string to_string() const;

 private:
  PartialExpr replace_leftmost(std::vector<Token> with, std::size_t new_holes, std::size_t new_ops) const;

  std::vector<Token> tokens_;
  std::size_t holes_ = 0;
  std::size_t operators_ = 0;
};

struct MctsConfig {
  double sa_uct = 1.5;
  std::size_t max_playout_depth = 0;
  /// Samples drawn for an MCTS task by the evaluation harness.
  std::size_t n_samples = 50;
  /// 0 lifts the cap; the timeout then drives the exploration decay.
  std::uint64_t max_iterations = 50000;
  double timeout = 60.0;
  std::uint64_t seed = 0;
  Objective objective = Objective::LogArith;
  OperatorSet operator_set = OperatorSet::expr();
  /// Operator rules stop firing once a partial expression holds this many operators.
  std::size_t max_expr_operators = 10;

  void validate() const;
};

/// Random derivation: up to `depth_budget` random rules applied at the
/// leftmost hole, then every remaining hole replaced by a random terminal.
Expr simulate(const PartialExpr& p, std::size_t depth_budget, const OperatorSet& grammar, unsigned arity,
              Rng& rng, std::size_t max_operators = 10);

/// Per-tree statistics, exposed for bookkeeping checks.
struct MctsStats {
  std::uint64_t iterations = 0;
  std::uint64_t tree_nodes = 0;
  /// Every node satisfied visits == own evaluations + sum of child visits.
  bool visit_counts_consistent = true;
};

SearchResult mcts_synthesize(const SampleSet& samples, const MctsConfig& cfg, MctsStats* stats = nullptr);

/// Bounded reward: 1 / (1 + mean per-sample distance).
double mcts_reward(double total_distance, std::size_t n_samples);

}  // namespace ilsynth
