#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ilsynth/expr.hpp"
#include "ilsynth/grammar.hpp"

namespace testsupport {

using ilsynth::Expr;
using ilsynth::NodeKind;
using ilsynth::Op;
using ilsynth::Word;

// Reference semantics written against signed 64-bit arithmetic, independent
// of the library's unsigned implementation.
inline std::int64_t sext(Word v, unsigned w) {
  const std::uint64_t m = (w >= 64) ? ~0ULL : ((1ULL << w) - 1);
  std::uint64_t x = v & m;
  if (x >> (w - 1) & 1) x |= ~m;
  return static_cast<std::int64_t>(x);
}

inline Word ref_op(Op op, Word a, Word b, unsigned w) {
  const std::uint64_t m = (1ULL << w) - 1;
  const std::uint64_t ua = a & m, ub = b & m;
  const std::int64_t sa = sext(a, w), sb = sext(b, w);
  std::uint64_t r = 0;
  switch (op) {
    case Op::Neg: r = static_cast<std::uint64_t>(-sa); break;
    case Op::Not: r = ~ua; break;
    case Op::Add: r = ua + ub; break;
    case Op::Sub: r = ua - ub; break;
    case Op::Mul: r = ua * ub; break;
    case Op::Shl: r = ub >= w ? 0 : ua << ub; break;
    case Op::Lshr: r = ub >= w ? 0 : ua >> ub; break;
    case Op::Ashr: r = static_cast<std::uint64_t>(ub >= w ? (sa < 0 ? -1 : 0) : sa >> ub); break;
    case Op::And: r = ua & ub; break;
    case Op::Or: r = ua | ub; break;
    case Op::Xor: r = ua ^ ub; break;
    case Op::Sdiv: r = sb == 0 ? (sa < 0 ? 1 : m) : static_cast<std::uint64_t>(sa / sb); break;
    case Op::Udiv: r = ub == 0 ? m : ua / ub; break;
    case Op::Srem: r = sb == 0 ? ua : static_cast<std::uint64_t>(sa % sb); break;
    case Op::Urem: r = ub == 0 ? ua : ua % ub; break;
    case Op::Concat: r = (ua << (w / 2)) | (ub & ((1ULL << (w / 2)) - 1)); break;
  }
  return static_cast<Word>(r & m);
}

inline Word ref_eval(const Expr& e, const std::vector<Word>& in, unsigned w = 32) {
  const std::uint64_t m = (1ULL << w) - 1;
  switch (e.kind()) {
    case NodeKind::Var:
      return static_cast<Word>(in.at(e.var_index()) & m);
    case NodeKind::Const:
      return static_cast<Word>(e.value() & m);
    case NodeKind::Unary:
      return ref_op(e.op(), ref_eval(e.child(0), in, w), 0, w);
    case NodeKind::Binary:
      return ref_op(e.op(), ref_eval(e.child(0), in, w), ref_eval(e.child(1), in, w), w);
    case NodeKind::IteEqConst:
      return ref_eval(e.child(0), in, w) == (e.value() & m) ? ref_eval(e.child(1), in, w)
                                                            : ref_eval(e.child(2), in, w);
  }
  return 0;
}

inline Word random_word(std::mt19937_64& rng) {
  static const Word special[] = {0u, 1u, 2u, 31u, 32u, 33u, 0xFFFFFFFFu, 0x80000000u, 0x7FFFFFFFu, 0xFFFFu, 0x10000u};
  switch (rng() % 4) {
    case 0:
      return special[rng() % std::size(special)];
    case 1:
      return static_cast<Word>(static_cast<std::int32_t>(rng() % 101) - 50);
    default:
      return static_cast<Word>(rng());
  }
}

inline std::vector<Word> random_inputs(std::mt19937_64& rng, unsigned arity) {
  std::vector<Word> v(arity);
  for (auto& x : v) x = random_word(rng);
  return v;
}

/// Random tree over `ops` (plus ITE when `ite`), depth <= max_depth.
inline Expr random_tree(std::mt19937_64& rng, unsigned max_depth, unsigned arity, const std::vector<Op>& ops,
                        bool ite = false) {
  if (max_depth == 0 || rng() % 4 == 0) {
    if (rng() % 3 == 0) return Expr::constant(random_word(rng));
    return Expr::var(static_cast<unsigned>(rng() % arity));
  }
  if (ite && rng() % 8 == 0)
    return Expr::ite_eq(random_tree(rng, max_depth - 1, arity, ops, ite), random_word(rng),
                        random_tree(rng, max_depth - 1, arity, ops, ite),
                        random_tree(rng, max_depth - 1, arity, ops, ite));
  const Op op = ops[rng() % ops.size()];
  if (ilsynth::info(op).arity == 1) return Expr::unary(op, random_tree(rng, max_depth - 1, arity, ops, ite));
  Expr l = random_tree(rng, max_depth - 1, arity, ops, ite);
  Expr r = random_tree(rng, max_depth - 1, arity, ops, ite);
  return Expr::binary(op, l, r);
}

inline std::vector<Op> all_ops() { return ilsynth::OperatorSet::full().operators; }

}  // namespace testsupport
