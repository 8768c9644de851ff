#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ilsynth/expr.hpp"

namespace ilsynth {

/// The search grammar: which operators and which constants candidates may use.
struct OperatorSet {
  std::string name = "custom";
  std::vector<Op> operators;
  std::vector<Word> constants{1};
  bool ite_enabled = false;

  static OperatorSet full();
  static OperatorSet expr();
  static OperatorSet mba();
  static OperatorSet mba_ite();
  /// Accepts full, expr, mba, mba-ite (case-insensitive); throws PreconditionError otherwise.
  static OperatorSet by_name(std::string_view name);

  bool contains(Op op) const;
  /// True when every operator, and every ITE node, of `e` is allowed here.
  bool admits(const Expr& e) const;

  /// `[1, n]`, the constant-range configuration.
  OperatorSet with_constant_range(Word n) const;
  OperatorSet with_constants(std::vector<Word> values) const;
};

}  // namespace ilsynth
