#include "ilsynth/simplify.hpp"

#include <array>
#include <utility>

namespace ilsynth {

namespace {

struct RuleText {
  const char* name;
  const char* pattern;
  const char* replacement;
};

// v0, v1, v2 are metavariables.
constexpr RuleText kRuleTable[] = {
    // arithmetic
    {"add-zero", "(add v0 0)", "v0"},
    {"sub-zero", "(sub v0 0)", "v0"},
    {"sub-neg", "(sub v0 (neg v1))", "(add v0 v1)"},
    {"sub-self", "(sub v0 v0)", "0"},
    {"neg-neg", "(neg (neg v0))", "v0"},
    {"add-neg", "(add (neg v0) v1)", "(sub v1 v0)"},
    {"mul-zero", "(mul v0 0)", "0"},
    {"mul-one", "(mul v0 1)", "v0"},
    {"shl-zero", "(shl v0 0)", "v0"},
    {"lshr-zero", "(lshr v0 0)", "v0"},
    {"ashr-zero", "(ashr v0 0)", "v0"},
    // boolean
    {"not-not", "(not (not v0))", "v0"},
    {"and-ones", "(and v0 -1)", "v0"},
    {"and-zero", "(and v0 0)", "0"},
    {"and-self", "(and v0 v0)", "v0"},
    {"or-zero", "(or v0 0)", "v0"},
    {"or-ones", "(or v0 -1)", "-1"},
    {"or-self", "(or v0 v0)", "v0"},
    {"xor-ones", "(xor v0 -1)", "(not v0)"},
    {"xor-zero", "(xor v0 0)", "v0"},
    {"xor-self", "(xor v0 v0)", "0"},
    // further shrinking identities
    {"zero-sub", "(sub 0 v0)", "(neg v0)"},
    {"mul-minus-one", "(mul v0 -1)", "(neg v0)"},
    {"udiv-one", "(udiv v0 1)", "v0"},
    {"sdiv-one", "(sdiv v0 1)", "v0"},
    {"neg-sub", "(neg (sub v0 v1))", "(sub v1 v0)"},
    {"sub-add-right", "(sub (add v0 v1) v1)", "v0"},
    {"sub-add-left", "(sub (add v0 v1) v0)", "v1"},
    {"add-sub-cancel", "(add (sub v0 v1) v1)", "v0"},
    {"sub-sub-cancel", "(sub v0 (sub v0 v1))", "v1"},
    {"mul-neg-neg", "(mul (neg v0) (neg v1))", "(mul v0 v1)"},
    {"add-not-self", "(add v0 (not v0))", "-1"},
    {"and-not-self", "(and v0 (not v0))", "0"},
    {"or-not-self", "(or v0 (not v0))", "-1"},
    {"xor-not-self", "(xor v0 (not v0))", "-1"},
    {"xor-not-not", "(xor (not v0) (not v1))", "(xor v0 v1)"},
    {"and-de-morgan", "(and (not v0) (not v1))", "(not (or v0 v1))"},
    {"or-de-morgan", "(or (not v0) (not v1))", "(not (and v0 v1))"},
    {"and-absorb", "(and v0 (or v0 v1))", "v0"},
    {"or-absorb", "(or v0 (and v0 v1))", "v0"},
};

std::vector<RewriteRule> build_rules() {
  std::vector<RewriteRule> rules;
  for (const auto& r : kRuleTable) {
    RewriteRule rule{r.name, parse(r.pattern), parse(r.replacement)};
    const Expr& p = rule.pattern;
    if (p.kind() == NodeKind::Binary && info(p.op()).commutative) {
      Expr swapped = Expr::binary(p.op(), p.child(1), p.child(0));
      if (swapped != p) {
        rules.push_back(rule);
        rules.push_back({std::string(r.name) + "/commuted", std::move(swapped), rule.replacement});
        continue;
      }
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

using Bindings = std::array<Expr, 8>;

bool match(const Expr& pattern, const Expr& e, Bindings& b) {
  switch (pattern.kind()) {
    case NodeKind::Var: {
      Expr& slot = b.at(pattern.var_index());
      if (slot.empty()) {
        slot = e;
        return true;
      }
      return slot == e;
    }
    case NodeKind::Const:
      return e.kind() == NodeKind::Const && e.value() == pattern.value();
    case NodeKind::Unary:
    case NodeKind::Binary:
      if (e.kind() != pattern.kind() || e.op() != pattern.op()) return false;
      break;
    case NodeKind::IteEqConst:
      if (e.kind() != NodeKind::IteEqConst || e.value() != pattern.value()) return false;
      break;
  }
  for (std::size_t i = 0; i < pattern.num_children(); ++i)
    if (!match(pattern.child(i), e.child(i), b)) return false;
  return true;
}

Expr instantiate(const Expr& tmpl, const Bindings& b) {
  switch (tmpl.kind()) {
    case NodeKind::Var:
      return b.at(tmpl.var_index());
    case NodeKind::Const:
      return tmpl;
    case NodeKind::Unary:
      return Expr::unary(tmpl.op(), instantiate(tmpl.child(0), b));
    case NodeKind::Binary:
      return Expr::binary(tmpl.op(), instantiate(tmpl.child(0), b), instantiate(tmpl.child(1), b));
    case NodeKind::IteEqConst:
      return Expr::ite_eq(instantiate(tmpl.child(0), b), tmpl.value(), instantiate(tmpl.child(1), b),
                          instantiate(tmpl.child(2), b));
  }
  return tmpl;
}

bool is_const(const Expr& e) { return e.kind() == NodeKind::Const; }

bool associative(Op op) {
  return op == Op::Add || op == Op::Mul || op == Op::And || op == Op::Or || op == Op::Xor;
}

/// (op (op E c1) c2) and commuted forms -> (op E (c1 op c2)).
std::optional<Expr> merge_constants(const Expr& e) {
  if (e.kind() != NodeKind::Binary || !associative(e.op())) return std::nullopt;
  const Op op = e.op();
  for (int outer = 0; outer < 2; ++outer) {
    const Expr& inner = e.child(outer);
    const Expr& c2 = e.child(1 - outer);
    if (!is_const(c2) || inner.kind() != NodeKind::Binary || inner.op() != op) continue;
    for (int k = 0; k < 2; ++k) {
      const Expr& c1 = inner.child(k);
      if (!is_const(c1) || is_const(inner.child(1 - k))) continue;
      return Expr::binary(op, inner.child(1 - k), Expr::constant(apply_op(op, c1.value(), c2.value())));
    }
  }
  return std::nullopt;
}

Expr rewrite_root(Expr e);

Expr simplify_once(const Expr& e) {
  if (e.is_leaf()) return e;
  bool changed = false;
  std::array<Expr, 3> kids;
  for (std::size_t i = 0; i < e.num_children(); ++i) {
    kids[i] = simplify_once(e.child(i));
    changed |= !kids[i].same_node(e.child(i));
  }
  Expr node = e;
  if (changed) {
    switch (e.kind()) {
      case NodeKind::Unary:
        node = Expr::unary(e.op(), kids[0]);
        break;
      case NodeKind::Binary:
        node = Expr::binary(e.op(), kids[0], kids[1]);
        break;
      case NodeKind::IteEqConst:
        node = Expr::ite_eq(kids[0], e.value(), kids[1], kids[2]);
        break;
      default:
        break;
    }
  }
  return rewrite_root(std::move(node));
}

Expr rewrite_root(Expr e) {
  for (;;) {
    if (e.is_leaf()) return e;
    std::optional<Expr> next = fold_constants(e);
    if (!next) next = merge_constants(e);
    if (!next) {
      for (const auto& rule : rewrite_rules()) {
        next = apply_rule(rule, e);
        if (next) break;
      }
    }
    if (!next) return e;
    // A rewrite may build new inner nodes; they need their own pass.
    e = simplify_once(*next);
  }
}

}  // namespace

const std::vector<RewriteRule>& rewrite_rules() {
  static const std::vector<RewriteRule> rules = build_rules();
  return rules;
}

std::optional<Expr> apply_rule(const RewriteRule& rule, const Expr& e) {
  Bindings b;
  if (!match(rule.pattern, e, b)) return std::nullopt;
  return instantiate(rule.replacement, b);
}

std::optional<Expr> fold_constants(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Var:
    case NodeKind::Const:
      return std::nullopt;
    case NodeKind::Unary:
      if (is_const(e.child(0))) return Expr::constant(apply_op(e.op(), e.child(0).value(), 0));
      return std::nullopt;
    case NodeKind::Binary:
      if (is_const(e.child(0)) && is_const(e.child(1)))
        return Expr::constant(apply_op(e.op(), e.child(0).value(), e.child(1).value()));
      return std::nullopt;
    case NodeKind::IteEqConst:
      if (is_const(e.child(0))) return e.child(0).value() == e.value() ? e.child(1) : e.child(2);
      if (e.child(1) == e.child(2)) return e.child(1);
      return std::nullopt;
  }
  return std::nullopt;
}

Expr simplify(const Expr& e) {
  Expr cur = e;
  for (;;) {
    Expr next = simplify_once(cur);
    if (next == cur) return next;
    cur = std::move(next);
  }
}

}  // namespace ilsynth
