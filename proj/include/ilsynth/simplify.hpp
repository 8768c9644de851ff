#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ilsynth/expr.hpp"

namespace ilsynth {

/// A rewrite `pattern -> replacement`. Variables in the pattern are
/// metavariables (v0 = E1, v1 = E2, ...) that match any subexpression; a
/// metavariable used twice requires structurally equal subtrees. Constants
/// match literally.
struct RewriteRule {
  std::string name;
  Expr pattern;
  Expr replacement;
};

/// The table applied by simplify, commuted variants included.
const std::vector<RewriteRule>& rewrite_rules();

/// Result of rewriting `e` at its root, if the rule matches there.
std::optional<Expr> apply_rule(const RewriteRule& rule, const Expr& e);

/// Folds a node whose operands are all constants (and ITEs with a constant
/// scrutinee or identical branches).
std::optional<Expr> fold_constants(const Expr& e);

/// Bottom-up rewriting to fixpoint. Every rewrite strictly shrinks the node
/// count, so the result is never larger than the input.
Expr simplify(const Expr& e);

}  // namespace ilsynth
