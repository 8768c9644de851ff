#include "ilsynth/mcts.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>

namespace ilsynth {

namespace {

constexpr unsigned kHoleSentinel = 0x7FFFFFF0u;

void tokens_from(const Expr& e, std::vector<PartialExpr::Token>& out, std::size_t& holes, std::size_t& ops) {
  using TK = PartialExpr::TokenKind;
  switch (e.kind()) {
    case NodeKind::Var:
      if (e.var_index() == kHoleSentinel) {
        out.push_back({TK::Hole});
        ++holes;
      } else {
        out.push_back({TK::Var, Op::Add, e.var_index()});
      }
      return;
    case NodeKind::Const:
      out.push_back({TK::Const, Op::Add, e.value()});
      return;
    case NodeKind::Unary:
    case NodeKind::Binary:
      out.push_back({TK::Op, e.op()});
      ++ops;
      break;
    case NodeKind::IteEqConst:
      out.push_back({TK::Ite, Op::Add, e.value()});
      ++ops;
      break;
  }
  for (std::size_t i = 0; i < e.num_children(); ++i) tokens_from(e.child(i), out, holes, ops);
}

Expr build_tokens(const std::vector<PartialExpr::Token>& toks, std::size_t& pos) {
  using TK = PartialExpr::TokenKind;
  const auto& t = toks.at(pos++);
  switch (t.kind) {
    case TK::Hole:
      throw PreconditionError("partial expression still has holes");
    case TK::Var:
      return Expr::var(t.value);
    case TK::Const:
      return Expr::constant(t.value);
    case TK::Op:
      if (info(t.op).arity == 1) return Expr::unary(t.op, build_tokens(toks, pos));
      else {
        Expr a = build_tokens(toks, pos);
        Expr b = build_tokens(toks, pos);
        return Expr::binary(t.op, std::move(a), std::move(b));
      }
    case TK::Ite: {
      Expr s = build_tokens(toks, pos);
      Expr a = build_tokens(toks, pos);
      Expr b = build_tokens(toks, pos);
      return Expr::ite_eq(std::move(s), t.value, std::move(a), std::move(b));
    }
  }
  return {};
}

}  // namespace

PartialExpr::PartialExpr() : tokens_{{TokenKind::Hole}}, holes_(1) {}

PartialExpr::PartialExpr(const Expr& terminal) { tokens_from(terminal, tokens_, holes_, operators_); }

PartialExpr PartialExpr::parse(std::string_view text) {
  // Holes become a sentinel variable so the ordinary parser can be reused.
  std::string rewritten;
  std::size_t i = 0;
  auto is_delim = [&](std::size_t k) {
    return k >= text.size() || text[k] == ' ' || text[k] == '(' || text[k] == ')' || text[k] == '\t';
  };
  while (i < text.size()) {
    if (text[i] == 'U' && (i == 0 || is_delim(i - 1)) && is_delim(i + 1)) {
      rewritten += "v" + std::to_string(kHoleSentinel);
    } else {
      rewritten += text[i];
    }
    ++i;
  }
  PartialExpr p;
  p.tokens_.clear();
  p.holes_ = 0;
  tokens_from(ilsynth::parse(rewritten), p.tokens_, p.holes_, p.operators_);
  return p;
}

PartialExpr PartialExpr::replace_leftmost(std::vector<Token> with, std::size_t new_holes, std::size_t new_ops) const {
  const auto it = std::find_if(tokens_.begin(), tokens_.end(), [](const Token& t) { return t.kind == TokenKind::Hole; });
  if (it == tokens_.end()) throw PreconditionError("no hole to expand");
  PartialExpr p;
  p.tokens_.clear();
  p.tokens_.reserve(tokens_.size() + with.size());
  p.tokens_.insert(p.tokens_.end(), tokens_.begin(), it);
  p.tokens_.insert(p.tokens_.end(), with.begin(), with.end());
  p.tokens_.insert(p.tokens_.end(), it + 1, tokens_.end());
  p.holes_ = holes_ - 1 + new_holes;
  p.operators_ = operators_ + new_ops;
  return p;
}

PartialExpr PartialExpr::expand_operator(Op op) const {
  std::vector<Token> with{{TokenKind::Op, op}};
  for (unsigned k = 0; k < info(op).arity; ++k) with.push_back({TokenKind::Hole});
  return replace_leftmost(std::move(with), info(op).arity, 1);
}

PartialExpr PartialExpr::expand_ite() const {
  return replace_leftmost({{TokenKind::Ite, Op::Add, 0}, {TokenKind::Hole}, {TokenKind::Hole}, {TokenKind::Hole}}, 3, 1);
}

PartialExpr PartialExpr::expand_terminal(const Expr& leaf) const {
  if (leaf.kind() == NodeKind::Var) return replace_leftmost({{TokenKind::Var, Op::Add, leaf.var_index()}}, 0, 0);
  if (leaf.kind() == NodeKind::Const) return replace_leftmost({{TokenKind::Const, Op::Add, leaf.value()}}, 0, 0);
  throw PreconditionError("terminal expected");
}

Expr PartialExpr::to_expr() const {
  std::size_t pos = 0;
  return build_tokens(tokens_, pos);
}

std::string PartialExpr::to_string() const {
  std::string out;
  std::size_t pos = 0;
  std::function<void()> rec = [&]() {
    const Token& t = tokens_.at(pos++);
    switch (t.kind) {
      case TokenKind::Hole:
        out += 'U';
        return;
      case TokenKind::Var:
        out += "v" + std::to_string(t.value);
        return;
      case TokenKind::Const:
        out += std::to_string(static_cast<std::int32_t>(t.value));
        return;
      case TokenKind::Op:
        out += "(" + std::string(info(t.op).mnemonic);
        for (unsigned k = 0; k < info(t.op).arity; ++k) {
          out += ' ';
          rec();
        }
        out += ')';
        return;
      case TokenKind::Ite:
        out += "(" + std::string(kIteMnemonic) + ' ';
        rec();
        out += ' ' + std::to_string(static_cast<std::int32_t>(t.value));
        for (int k = 0; k < 2; ++k) {
          out += ' ';
          rec();
        }
        out += ')';
        return;
    }
  };
  rec();
  return out;
}

void MctsConfig::validate() const {
  if (!(sa_uct > 0.0)) throw PreconditionError("SA-UCT constant must be positive");
  if (!(timeout > 0.0)) throw PreconditionError("timeout must be positive");
  if (operator_set.operators.empty() && !operator_set.ite_enabled) throw PreconditionError("operator set is empty");
}

double mcts_reward(double total_distance, std::size_t n_samples) {
  return 1.0 / (1.0 + total_distance / static_cast<double>(std::max<std::size_t>(n_samples, 1)));
}

// ---------------------------------------------------------------------------
// Grammar rules: operators, the ITE rule, then terminals.

namespace {

class Rules {
 public:
  Rules(const OperatorSet& grammar, unsigned arity) : grammar_(grammar), arity_(arity) {
    n_ops_ = grammar.operators.size() + (grammar.ite_enabled ? 1 : 0);
    n_terms_ = arity + grammar.constants.size();
    if (n_terms_ == 0) throw PreconditionError("grammar has no terminals");
  }

  std::size_t operator_rules() const { return n_ops_; }
  std::size_t size() const { return n_ops_ + n_terms_; }
  bool is_operator(std::size_t r) const { return r < n_ops_; }

  PartialExpr apply(const PartialExpr& p, std::size_t r) const {
    if (r < grammar_.operators.size()) return p.expand_operator(grammar_.operators[r]);
    if (r < n_ops_) return p.expand_ite();
    const std::size_t t = r - n_ops_;
    if (t < arity_) return p.expand_terminal(Expr::var(static_cast<unsigned>(t)));
    return p.expand_terminal(Expr::constant(grammar_.constants[t - arity_]));
  }

  std::size_t random_rule(Rng& rng, bool operators_allowed) const {
    if (operators_allowed) return std::uniform_int_distribution<std::size_t>(0, size() - 1)(rng);
    return n_ops_ + std::uniform_int_distribution<std::size_t>(0, n_terms_ - 1)(rng);
  }

 private:
  const OperatorSet& grammar_;
  unsigned arity_;
  std::size_t n_ops_;
  std::size_t n_terms_;
};

Expr simulate_with(PartialExpr p, std::size_t depth_budget, const Rules& rules, Rng& rng, std::size_t max_ops) {
  for (std::size_t step = 0; step < depth_budget && !p.is_terminal(); ++step)
    p = rules.apply(p, rules.random_rule(rng, p.operators() < max_ops));
  while (!p.is_terminal()) p = rules.apply(p, rules.random_rule(rng, false));
  return p.to_expr();
}

struct TreeNode {
  PartialExpr state;
  TreeNode* parent = nullptr;
  std::vector<std::unique_ptr<TreeNode>> children;
  std::vector<std::uint16_t> untried;
  std::uint64_t visits = 0;
  std::uint64_t own_visits = 0;
  double reward_sum = 0.0;
  double terminal_reward = -1.0;
};

bool check_visits(const TreeNode& n, std::uint64_t& count) {
  ++count;
  std::uint64_t sum = n.own_visits;
  bool ok = true;
  for (const auto& c : n.children) {
    sum += c->visits;
    ok = check_visits(*c, count) && ok;
  }
  return ok && sum == n.visits;
}

}  // namespace

Expr simulate(const PartialExpr& p, std::size_t depth_budget, const OperatorSet& grammar, unsigned arity, Rng& rng,
              std::size_t max_operators) {
  const Rules rules(grammar, arity);
  return simulate_with(p, depth_budget, rules, rng, max_operators);
}

SearchResult mcts_synthesize(const SampleSet& samples, const MctsConfig& cfg, MctsStats* stats) {
  using Clock = std::chrono::steady_clock;
  cfg.validate();
  if (samples.size() == 0) throw PreconditionError("empty sample set");
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  constexpr std::uint64_t kMaxTreeNodes = 1'000'000;

  Rng rng(cfg.seed);
  const Rules rules(cfg.operator_set, samples.arity());
  Scorer scorer(samples, cfg.objective);

  SearchResult result;
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t tree_nodes = 1;

  auto make_node = [&](PartialExpr state, TreeNode* parent) {
    auto n = std::make_unique<TreeNode>();
    n->state = std::move(state);
    n->parent = parent;
    if (!n->state.is_terminal()) {
      const bool ops = n->state.operators() < cfg.max_expr_operators;
      for (std::size_t r = ops ? 0 : rules.operator_rules(); r < rules.size(); ++r)
        n->untried.push_back(static_cast<std::uint16_t>(r));
      std::shuffle(n->untried.begin(), n->untried.end(), rng);
    }
    return n;
  };

  auto evaluate_terminal = [&](const Expr& e) {
    const double d = scorer(e);
    if (d < best) {
      best = d;
      result.expr = e;
      result.distance_trace.push_back({elapsed(), d});
    }
    return mcts_reward(d, samples.size());
  };

  auto backpropagate = [](TreeNode* n, double reward) {
    for (; n != nullptr; n = n->parent) {
      ++n->visits;
      n->reward_sum += reward;
    }
  };

  auto root = make_node(PartialExpr(), nullptr);
  std::uint64_t iter = 0;
  while (best != 0.0) {
    if (cfg.max_iterations != 0 && iter >= cfg.max_iterations) break;
    const double t = elapsed();
    if (t >= cfg.timeout) break;
    // Exploration weight decays linearly with consumed budget.
    double progress = t / cfg.timeout;
    if (cfg.max_iterations != 0)
      progress = std::max(progress, static_cast<double>(iter) / static_cast<double>(cfg.max_iterations));
    const double exploration = cfg.sa_uct * std::max(0.0, 1.0 - progress);
    ++iter;

    TreeNode* node = root.get();
    for (;;) {
      if (node->state.is_terminal()) {
        if (node->terminal_reward < 0.0) node->terminal_reward = evaluate_terminal(node->state.to_expr());
        ++node->own_visits;
        backpropagate(node, node->terminal_reward);
        break;
      }
      if (!node->untried.empty() && tree_nodes < kMaxTreeNodes) {
        const std::size_t rule = node->untried.back();
        node->untried.pop_back();
        node->children.push_back(make_node(rules.apply(node->state, rule), node));
        ++tree_nodes;
        TreeNode* child = node->children.back().get();
        double reward;
        if (child->state.is_terminal()) {
          child->terminal_reward = evaluate_terminal(child->state.to_expr());
          reward = child->terminal_reward;
        } else {
          reward = evaluate_terminal(simulate_with(child->state, cfg.max_playout_depth, rules, rng,
                                                   cfg.max_expr_operators));
        }
        ++child->own_visits;
        backpropagate(child, reward);
        break;
      }
      if (node->children.empty()) {
        // Tree is full here: fall back to a fresh playout from this node.
        const double reward = evaluate_terminal(
            simulate_with(node->state, cfg.max_playout_depth, rules, rng, cfg.max_expr_operators));
        ++node->own_visits;
        backpropagate(node, reward);
        break;
      }
      const double log_n = std::log(static_cast<double>(node->visits));
      TreeNode* chosen = nullptr;
      double chosen_score = -std::numeric_limits<double>::infinity();
      for (const auto& c : node->children) {
        const double n = static_cast<double>(c->visits);
        const double score = c->reward_sum / n + exploration * std::sqrt(log_n / n);
        if (score > chosen_score) {
          chosen_score = score;
          chosen = c.get();
        }
      }
      node = chosen;
    }
  }

  result.iterations = iter;
  result.wall_time = elapsed();
  result.final_distance = best;
  if (result.expr.empty())
    result.status = SearchStatus::Failure;
  else
    result.status = best == 0.0 ? SearchStatus::Exact : SearchStatus::Best;
  if (stats) {
    stats->iterations = iter;
    std::uint64_t counted = 0;
    stats->visit_counts_consistent = check_visits(*root, counted);
    stats->tree_nodes = counted;
  }
  return result;
}

}  // namespace ilsynth
