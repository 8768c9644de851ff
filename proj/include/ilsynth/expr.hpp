#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ilsynth/error.hpp"

namespace ilsynth {

using Word = std::uint32_t;

inline constexpr unsigned kWordBits = 32;

enum class Op : std::uint8_t {
  Neg,
  Not,
  Add,
  Sub,
  Mul,
  Shl,
  Lshr,
  Ashr,
  And,
  Or,
  Xor,
  Sdiv,
  Udiv,
  Srem,
  Urem,
  Concat,
};

inline constexpr std::size_t kNumOps = 16;

struct OperatorInfo {
  Op op;
  std::string_view mnemonic;
  unsigned arity;
  bool commutative;
};

const OperatorInfo& info(Op op);
std::span<const OperatorInfo> all_operators();
std::optional<Op> op_from_mnemonic(std::string_view mnemonic);

inline constexpr std::string_view kIteMnemonic = "ite-eq";

/// Applies `op` to operands already reduced to `width` bits. Total: division
/// and remainder by zero follow SMT-LIB bitvector semantics.
Word apply_op(Op op, Word a, Word b, unsigned width = kWordBits);

inline constexpr Word width_mask(unsigned width) {
  return width >= 32 ? ~Word{0} : ((Word{1} << width) - 1);
}

enum class NodeKind : std::uint8_t { Var, Const, Unary, Binary, IteEqConst };

struct Node;

/// Immutable, structurally shared 32-bit bitvector expression.
class Expr {
 public:
  /// Empty handle; only valid as an assignment target.
  Expr() = default;
  bool empty() const { return node_ == nullptr; }

  static Expr var(unsigned index);
  static Expr constant(Word value);
  static Expr unary(Op op, Expr child);
  static Expr binary(Op op, Expr lhs, Expr rhs);
  static Expr ite_eq(Expr scrutinee, Word constant, Expr then_branch, Expr else_branch);

  NodeKind kind() const;
  bool is_leaf() const { return kind() == NodeKind::Var || kind() == NodeKind::Const; }
  Op op() const;               // Unary/Binary only
  unsigned var_index() const;  // Var only
  Word value() const;          // Const, and the compared constant of IteEqConst
  std::size_t num_children() const;
  const Expr& child(std::size_t i) const;

  /// Number of operator nodes; leaves count 0.
  std::size_t size() const;
  /// Total node count, leaves included.
  std::size_t node_count() const;
  std::size_t height() const;
  /// One past the largest variable index, 0 if variable-free.
  unsigned min_arity() const;
  std::size_t hash() const;

  /// Node at a pre-order position in [0, node_count()).
  const Expr& at(std::size_t preorder_index) const;
  /// Copy with the pre-order position replaced; ancestors are rebuilt, the rest is shared.
  Expr replace_at(std::size_t preorder_index, const Expr& replacement) const;

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

  bool same_node(const Expr& other) const { return node_ == other.node_; }

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Node {
  NodeKind kind{NodeKind::Const};
  Op op{Op::Add};
  Word value{0};
  std::array<Expr, 3> kids{};
  std::uint8_t nkids{0};
  std::size_t size{0};
  std::size_t nodes{1};
  std::size_t height{0};
  unsigned arity{0};
  std::size_t hash{0};
};

struct ExprHash {
  std::size_t operator()(const Expr& e) const { return e.hash(); }
};

/// Single-point evaluation at full width.
Word evaluate(const Expr& e, std::span<const Word> inputs);

/// Evaluation with all arithmetic reduced modulo 2^width; inputs and constants
/// are masked to `width` bits first.
Word evaluate_width(const Expr& e, std::span<const Word> inputs, unsigned width);

/// Column-major batch evaluation: `columns[v]` holds variable v for every
/// point; `out` receives one result per point. Same semantics as
/// evaluate_width.
class BatchEvaluator {
 public:
  void run(const Expr& e, std::span<const std::vector<Word>> columns, std::span<Word> out,
           unsigned width = kWordBits);

 private:
  void eval(const Expr& e, std::span<const std::vector<Word>> columns, Word* out, std::size_t depth);
  Word* scratch(std::size_t depth, std::size_t slot);

  std::size_t n_ = 0;
  unsigned width_ = kWordBits;
  Word mask_ = ~Word{0};
  std::vector<std::vector<Word>> scratch_;
};

Expr parse(std::string_view text);
std::string print(const Expr& e);

/// Reads a corpus: one expression per line, blank lines and `#` lines skipped.
std::vector<Expr> parse_lines(std::string_view text);

// Small builders for readable test and generator code.
namespace build {
inline Expr v(unsigned i) { return Expr::var(i); }
inline Expr c(Word w) { return Expr::constant(w); }
inline Expr neg(Expr a) { return Expr::unary(Op::Neg, std::move(a)); }
inline Expr bnot(Expr a) { return Expr::unary(Op::Not, std::move(a)); }
inline Expr add(Expr a, Expr b) { return Expr::binary(Op::Add, std::move(a), std::move(b)); }
inline Expr sub(Expr a, Expr b) { return Expr::binary(Op::Sub, std::move(a), std::move(b)); }
inline Expr mul(Expr a, Expr b) { return Expr::binary(Op::Mul, std::move(a), std::move(b)); }
inline Expr band(Expr a, Expr b) { return Expr::binary(Op::And, std::move(a), std::move(b)); }
inline Expr bor(Expr a, Expr b) { return Expr::binary(Op::Or, std::move(a), std::move(b)); }
inline Expr bxor(Expr a, Expr b) { return Expr::binary(Op::Xor, std::move(a), std::move(b)); }
inline Expr ashr(Expr a, Expr b) { return Expr::binary(Op::Ashr, std::move(a), std::move(b)); }
}  // namespace build

}  // namespace ilsynth
