#include "ilsynth/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>

namespace ilsynth {

namespace {

constexpr std::array<OperatorInfo, kNumOps> kOperators{{
    {Op::Neg, "neg", 1, false},
    {Op::Not, "not", 1, false},
    {Op::Add, "add", 2, true},
    {Op::Sub, "sub", 2, false},
    {Op::Mul, "mul", 2, true},
    {Op::Shl, "shl", 2, false},
    {Op::Lshr, "lshr", 2, false},
    {Op::Ashr, "ashr", 2, false},
    {Op::And, "and", 2, true},
    {Op::Or, "or", 2, true},
    {Op::Xor, "xor", 2, true},
    {Op::Sdiv, "sdiv", 2, false},
    {Op::Udiv, "udiv", 2, false},
    {Op::Srem, "srem", 2, false},
    {Op::Urem, "urem", 2, false},
    {Op::Concat, "concat", 2, false},
}};

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

inline bool negative(Word a, unsigned width) { return (a >> (width - 1)) & 1U; }

}  // namespace

const OperatorInfo& info(Op op) { return kOperators[static_cast<std::size_t>(op)]; }

std::span<const OperatorInfo> all_operators() { return kOperators; }

std::optional<Op> op_from_mnemonic(std::string_view mnemonic) {
  for (const auto& o : kOperators)
    if (o.mnemonic == mnemonic) return o.op;
  return std::nullopt;
}

Word apply_op(Op op, Word a, Word b, unsigned width) {
  const Word m = width_mask(width);
  switch (op) {
    case Op::Neg:
      return (Word{0} - a) & m;
    case Op::Not:
      return ~a & m;
    case Op::Add:
      return (a + b) & m;
    case Op::Sub:
      return (a - b) & m;
    case Op::Mul:
      return (a * b) & m;
    case Op::Shl:
      return b >= width ? 0 : (a << b) & m;
    case Op::Lshr:
      return b >= width ? 0 : a >> b;
    case Op::Ashr: {
      const bool neg = negative(a, width);
      if (b >= width) return neg ? m : 0;
      Word r = a >> b;
      if (neg && b > 0) r |= m & ~(m >> b);
      return r;
    }
    case Op::And:
      return a & b;
    case Op::Or:
      return a | b;
    case Op::Xor:
      return a ^ b;
    case Op::Udiv:
      return b == 0 ? m : a / b;
    case Op::Urem:
      return b == 0 ? a : a % b;
    case Op::Sdiv: {
      // bvsdiv expressed through bvudiv on magnitudes.
      const bool na = negative(a, width), nb = negative(b, width);
      const Word ua = na ? (Word{0} - a) & m : a;
      const Word ub = nb ? (Word{0} - b) & m : b;
      const Word q = ub == 0 ? m : ua / ub;
      return (na != nb) ? (Word{0} - q) & m : q;
    }
    case Op::Srem: {
      const bool na = negative(a, width), nb = negative(b, width);
      const Word ua = na ? (Word{0} - a) & m : a;
      const Word ub = nb ? (Word{0} - b) & m : b;
      const Word r = ub == 0 ? ua : ua % ub;
      return na ? (Word{0} - r) & m : r;
    }
    case Op::Concat: {
      const unsigned half = width / 2;
      return ((a << half) | (b & width_mask(half))) & m;
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Expr

namespace {

std::shared_ptr<Node> make_node(NodeKind kind) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  return n;
}

void finish(Node& n) {
  std::size_t h = mix(static_cast<std::size_t>(n.kind), static_cast<std::size_t>(n.op));
  h = mix(h, n.value);
  n.size = (n.kind == NodeKind::Var || n.kind == NodeKind::Const) ? 0 : 1;
  n.nodes = 1;
  n.height = 0;
  n.arity = n.kind == NodeKind::Var ? n.value + 1 : 0;
  for (std::uint8_t i = 0; i < n.nkids; ++i) {
    const Expr& k = n.kids[i];
    if (k.empty()) throw MalformedExpr("empty child expression");
    n.size += k.size();
    n.nodes += k.node_count();
    n.height = std::max(n.height, k.height() + 1);
    n.arity = std::max(n.arity, k.min_arity());
    h = mix(h, k.hash());
  }
  n.hash = h;
}

}  // namespace

Expr Expr::var(unsigned index) {
  auto n = make_node(NodeKind::Var);
  n->value = index;
  finish(*n);
  return Expr(std::move(n));
}

Expr Expr::constant(Word value) {
  auto n = make_node(NodeKind::Const);
  n->value = value;
  finish(*n);
  return Expr(std::move(n));
}

Expr Expr::unary(Op op, Expr child) {
  if (info(op).arity != 1) throw MalformedExpr(std::string(info(op).mnemonic) + " is not unary");
  auto n = make_node(NodeKind::Unary);
  n->op = op;
  n->kids[0] = std::move(child);
  n->nkids = 1;
  finish(*n);
  return Expr(std::move(n));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  if (info(op).arity != 2) throw MalformedExpr(std::string(info(op).mnemonic) + " is not binary");
  auto n = make_node(NodeKind::Binary);
  n->op = op;
  n->kids[0] = std::move(lhs);
  n->kids[1] = std::move(rhs);
  n->nkids = 2;
  finish(*n);
  return Expr(std::move(n));
}

Expr Expr::ite_eq(Expr scrutinee, Word constant, Expr then_branch, Expr else_branch) {
  auto n = make_node(NodeKind::IteEqConst);
  n->value = constant;
  n->kids[0] = std::move(scrutinee);
  n->kids[1] = std::move(then_branch);
  n->kids[2] = std::move(else_branch);
  n->nkids = 3;
  finish(*n);
  return Expr(std::move(n));
}

NodeKind Expr::kind() const { return node_->kind; }
Op Expr::op() const { return node_->op; }
unsigned Expr::var_index() const { return node_->value; }
Word Expr::value() const { return node_->value; }
std::size_t Expr::num_children() const { return node_->nkids; }
const Expr& Expr::child(std::size_t i) const { return node_->kids[i]; }
std::size_t Expr::size() const { return node_->size; }
std::size_t Expr::node_count() const { return node_->nodes; }
std::size_t Expr::height() const { return node_->height; }
unsigned Expr::min_arity() const { return node_->arity; }
std::size_t Expr::hash() const { return node_->hash; }

const Expr& Expr::at(std::size_t index) const {
  const Expr* cur = this;
  while (index != 0) {
    --index;
    const Node& n = *cur->node_;
    std::uint8_t i = 0;
    for (; i < n.nkids; ++i) {
      const std::size_t k = n.kids[i].node_count();
      if (index < k) break;
      index -= k;
    }
    if (i == n.nkids) throw PreconditionError("node index out of range");
    cur = &n.kids[i];
  }
  return *cur;
}

Expr Expr::replace_at(std::size_t index, const Expr& replacement) const {
  if (index == 0) return replacement;
  --index;
  const Node& n = *node_;
  for (std::uint8_t i = 0; i < n.nkids; ++i) {
    const std::size_t k = n.kids[i].node_count();
    if (index < k) {
      auto copy = std::make_shared<Node>(n);
      copy->kids[i] = n.kids[i].replace_at(index, replacement);
      finish(*copy);
      return Expr(std::move(copy));
    }
    index -= k;
  }
  throw PreconditionError("node index out of range");
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  const Node& x = *a.node_;
  const Node& y = *b.node_;
  if (x.hash != y.hash || x.kind != y.kind || x.nodes != y.nodes || x.value != y.value) return false;
  if ((x.kind == NodeKind::Unary || x.kind == NodeKind::Binary) && x.op != y.op) return false;
  for (std::uint8_t i = 0; i < x.nkids; ++i)
    if (!(x.kids[i] == y.kids[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

Word eval_point(const Expr& e, std::span<const Word> in, unsigned width) {
  const Word m = width_mask(width);
  switch (e.kind()) {
    case NodeKind::Var:
      if (e.var_index() >= in.size())
        throw MalformedExpr("variable v" + std::to_string(e.var_index()) + " out of range for " +
                            std::to_string(in.size()) + " inputs");
      return in[e.var_index()] & m;
    case NodeKind::Const:
      return e.value() & m;
    case NodeKind::Unary:
      return apply_op(e.op(), eval_point(e.child(0), in, width), 0, width);
    case NodeKind::Binary: {
      const Word a = eval_point(e.child(0), in, width);
      const Word b = eval_point(e.child(1), in, width);
      return apply_op(e.op(), a, b, width);
    }
    case NodeKind::IteEqConst: {
      const Word s = eval_point(e.child(0), in, width);
      return s == (e.value() & m) ? eval_point(e.child(1), in, width) : eval_point(e.child(2), in, width);
    }
  }
  return 0;
}

}  // namespace

Word evaluate(const Expr& e, std::span<const Word> inputs) { return eval_point(e, inputs, kWordBits); }

Word evaluate_width(const Expr& e, std::span<const Word> inputs, unsigned width) {
  if (width == 0 || width > kWordBits) throw PreconditionError("width must be in [1, 32]");
  return eval_point(e, inputs, width);
}

Word* BatchEvaluator::scratch(std::size_t depth, std::size_t slot) {
  const std::size_t idx = depth * 2 + slot;
  if (scratch_.size() <= idx) scratch_.resize(idx + 1);
  auto& buf = scratch_[idx];
  if (buf.size() < n_) buf.resize(n_);
  return buf.data();
}

void BatchEvaluator::run(const Expr& e, std::span<const std::vector<Word>> columns, std::span<Word> out,
                         unsigned width) {
  if (width == 0 || width > kWordBits) throw PreconditionError("width must be in [1, 32]");
  n_ = out.size();
  width_ = width;
  mask_ = width_mask(width);
  if (e.min_arity() > columns.size())
    throw MalformedExpr("variable v" + std::to_string(e.min_arity() - 1) + " out of range for " +
                        std::to_string(columns.size()) + " inputs");
  for (std::size_t v = 0; v < e.min_arity(); ++v)
    if (columns[v].size() < n_) throw PreconditionError("input column shorter than output span");
  eval(e, columns, out.data(), 0);
}

void BatchEvaluator::eval(const Expr& e, std::span<const std::vector<Word>> columns, Word* out,
                          std::size_t depth) {
  const std::size_t n = n_;
  const Word m = mask_;
  switch (e.kind()) {
    case NodeKind::Var: {
      const Word* col = columns[e.var_index()].data();
      for (std::size_t i = 0; i < n; ++i) out[i] = col[i] & m;
      return;
    }
    case NodeKind::Const:
      std::fill(out, out + n, e.value() & m);
      return;
    case NodeKind::Unary:
      eval(e.child(0), columns, out, depth + 1);
      if (e.op() == Op::Neg)
        for (std::size_t i = 0; i < n; ++i) out[i] = (Word{0} - out[i]) & m;
      else
        for (std::size_t i = 0; i < n; ++i) out[i] = ~out[i] & m;
      return;
    case NodeKind::Binary: {
      eval(e.child(0), columns, out, depth + 1);
      Word* rhs = scratch(depth, 0);
      eval(e.child(1), columns, rhs, depth + 1);
      switch (e.op()) {
        case Op::Add:
          for (std::size_t i = 0; i < n; ++i) out[i] = (out[i] + rhs[i]) & m;
          break;
        case Op::Sub:
          for (std::size_t i = 0; i < n; ++i) out[i] = (out[i] - rhs[i]) & m;
          break;
        case Op::Mul:
          for (std::size_t i = 0; i < n; ++i) out[i] = (out[i] * rhs[i]) & m;
          break;
        case Op::And:
          for (std::size_t i = 0; i < n; ++i) out[i] &= rhs[i];
          break;
        case Op::Or:
          for (std::size_t i = 0; i < n; ++i) out[i] |= rhs[i];
          break;
        case Op::Xor:
          for (std::size_t i = 0; i < n; ++i) out[i] ^= rhs[i];
          break;
        default: {
          const Op op = e.op();
          const unsigned w = width_;
          for (std::size_t i = 0; i < n; ++i) out[i] = apply_op(op, out[i], rhs[i], w);
          break;
        }
      }
      return;
    }
    case NodeKind::IteEqConst: {
      eval(e.child(0), columns, out, depth + 1);
      Word* t = scratch(depth, 0);
      eval(e.child(1), columns, t, depth + 1);
      Word* f = scratch(depth, 1);
      eval(e.child(2), columns, f, depth + 1);
      const Word c = e.value() & m;
      for (std::size_t i = 0; i < n; ++i) out[i] = out[i] == c ? t[i] : f[i];
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// Prefix notation

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse_all() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("trailing input", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view atom() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')')
      ++pos_;
    if (start == pos_) {
      if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
      throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    }
    return text_.substr(start, pos_ - start);
  }

  Word parse_constant(std::string_view tok, std::size_t at) {
    bool neg = false;
    std::string_view digits = tok;
    if (!digits.empty() && digits[0] == '-') {
      neg = true;
      digits.remove_prefix(1);
    }
    int base = 10;
    if (digits.size() > 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X')) {
      base = 16;
      digits.remove_prefix(2);
    }
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, base);
    if (digits.empty() || ec != std::errc() || p != digits.data() + digits.size())
      throw ParseError("invalid token '" + std::string(tok) + "'", at);
    if ((neg && v > 0x80000000ULL) || (!neg && v > 0xFFFFFFFFULL))
      throw ParseError("constant out of 32-bit range '" + std::string(tok) + "'", at);
    return neg ? static_cast<Word>(0 - v) : static_cast<Word>(v);
  }

  Expr leaf(std::string_view tok, std::size_t at) {
    if (tok.size() > 1 && tok[0] == 'v' && std::isdigit(static_cast<unsigned char>(tok[1]))) {
      unsigned idx = 0;
      auto [p, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), idx);
      if (ec != std::errc() || p != tok.data() + tok.size())
        throw ParseError("invalid variable '" + std::string(tok) + "'", at);
      return Expr::var(idx);
    }
    return Expr::constant(parse_constant(tok, at));
  }

  Expr parse_expr() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    if (text_[pos_] == ')') throw ParseError("unexpected ')'", pos_);
    if (text_[pos_] != '(') {
      const std::size_t at = pos_;
      return leaf(atom(), at);
    }
    ++pos_;
    skip_ws();
    const std::size_t at = pos_;
    const std::string_view mn = atom();
    Expr result;
    if (mn == kIteMnemonic) {
      Expr s = parse_expr();
      skip_ws();
      const std::size_t cat = pos_;
      const Word c = parse_constant(atom(), cat);
      Expr t = parse_expr();
      Expr f = parse_expr();
      result = Expr::ite_eq(std::move(s), c, std::move(t), std::move(f));
    } else {
      const auto op = op_from_mnemonic(mn);
      if (!op) throw ParseError("unknown mnemonic '" + std::string(mn) + "'", at);
      if (info(*op).arity == 1) {
        result = Expr::unary(*op, parse_expr());
      } else {
        Expr a = parse_expr();
        Expr b = parse_expr();
        result = Expr::binary(*op, std::move(a), std::move(b));
      }
    }
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != ')') throw ParseError("expected ')'", pos_);
    ++pos_;
    return result;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print_into(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case NodeKind::Var:
      out += 'v';
      out += std::to_string(e.var_index());
      return;
    case NodeKind::Const:
      out += std::to_string(static_cast<std::int32_t>(e.value()));
      return;
    case NodeKind::Unary:
    case NodeKind::Binary:
      out += '(';
      out += info(e.op()).mnemonic;
      for (std::size_t i = 0; i < e.num_children(); ++i) {
        out += ' ';
        print_into(e.child(i), out);
      }
      out += ')';
      return;
    case NodeKind::IteEqConst:
      out += '(';
      out += kIteMnemonic;
      out += ' ';
      print_into(e.child(0), out);
      out += ' ';
      out += std::to_string(static_cast<std::int32_t>(e.value()));
      out += ' ';
      print_into(e.child(1), out);
      out += ' ';
      print_into(e.child(2), out);
      out += ')';
      return;
  }
}

}  // namespace

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

std::string print(const Expr& e) {
  std::string out;
  print_into(e, out);
  return out;
}

std::vector<Expr> parse_lines(std::string_view text) {
  std::vector<Expr> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '#') continue;
    try {
      out.push_back(parse(line));
    } catch (const ParseError& err) {
      throw ParseError("line " + std::to_string(line_no) + ": " + err.reason(), err.position());
    }
  }
  return out;
}

}  // namespace ilsynth
