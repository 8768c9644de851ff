#include "ilsynth/grammar.hpp"

#include <algorithm>
#include <cctype>

namespace ilsynth {

OperatorSet OperatorSet::full() {
  OperatorSet s;
  s.name = "full";
  s.operators = {Op::Neg, Op::Not, Op::Add, Op::Sub,  Op::Mul,  Op::Lshr, Op::Ashr,  Op::Shl,
                 Op::And, Op::Or,  Op::Xor, Op::Sdiv, Op::Udiv, Op::Srem, Op::Urem, Op::Concat};
  return s;
}

OperatorSet OperatorSet::expr() {
  OperatorSet s;
  s.name = "expr";
  s.operators = {Op::Neg, Op::Not, Op::Add, Op::Sub, Op::Mul, Op::And,
                 Op::Or,  Op::Xor, Op::Sdiv, Op::Udiv, Op::Concat};
  return s;
}

OperatorSet OperatorSet::mba() {
  OperatorSet s;
  s.name = "mba";
  s.operators = {Op::Neg, Op::Not, Op::Add, Op::Sub, Op::Mul, Op::And, Op::Or, Op::Xor};
  return s;
}

OperatorSet OperatorSet::mba_ite() {
  OperatorSet s = mba();
  s.name = "mba-ite";
  s.ite_enabled = true;
  return s;
}

OperatorSet OperatorSet::by_name(std::string_view name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
  if (n == "full") return full();
  if (n == "expr") return expr();
  if (n == "mba") return mba();
  if (n == "mba-ite" || n == "mba_ite") return mba_ite();
  throw PreconditionError("unknown operator set '" + std::string(name) + "'");
}

bool OperatorSet::contains(Op op) const {
  return std::find(operators.begin(), operators.end(), op) != operators.end();
}

bool OperatorSet::admits(const Expr& e) const {
  switch (e.kind()) {
    case NodeKind::Var:
    case NodeKind::Const:
      return true;
    case NodeKind::Unary:
    case NodeKind::Binary:
      if (!contains(e.op())) return false;
      break;
    case NodeKind::IteEqConst:
      if (!ite_enabled) return false;
      break;
  }
  for (std::size_t i = 0; i < e.num_children(); ++i)
    if (!admits(e.child(i))) return false;
  return true;
}

OperatorSet OperatorSet::with_constant_range(Word n) const {
  std::vector<Word> values;
  for (Word v = 1; v <= n; ++v) values.push_back(v);
  return with_constants(std::move(values));
}

OperatorSet OperatorSet::with_constants(std::vector<Word> values) const {
  OperatorSet s = *this;
  s.constants = std::move(values);
  return s;
}

}  // namespace ilsynth
