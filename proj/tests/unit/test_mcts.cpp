#include <doctest.h>

#include <set>

#include "ilsynth/mcts.hpp"
#include "support.hpp"

using namespace ilsynth;
using namespace ilsynth::build;

namespace {

SampleSet samples_of(const Expr& target, unsigned arity, std::size_t n = 50) {
  SamplingStrategy s;
  s.n_random = n - 5;
  return sample_expr(target, arity, s);
}

}  // namespace

TEST_CASE("partial expressions") {
  PartialExpr p;
  CHECK(p.holes() == 1);
  CHECK(p.to_string() == "U");
  const PartialExpr q = p.expand_operator(Op::Add);
  CHECK(q.holes() == 2);
  CHECK(q.operators() == 1);
  CHECK(q.to_string() == "(add U U)");
  const PartialExpr r = q.expand_terminal(v(0)).expand_operator(Op::Neg).expand_terminal(c(1));
  CHECK(r.is_terminal());
  CHECK(r.to_expr() == add(v(0), neg(c(1))));
  CHECK(PartialExpr::parse("(add U v0)").to_string() == "(add U v0)");
  CHECK(PartialExpr::parse("(add U v0)").expand_terminal(v(1)).to_expr() == add(v(1), v(0)));
  CHECK_THROWS(PartialExpr::parse("(add U v0)").to_expr());
  const PartialExpr ite = p.expand_ite();
  CHECK(ite.holes() == 3);
}

TEST_CASE("simulation with zero depth fills holes with terminals") {
  const OperatorSet g = OperatorSet::mba();
  Rng rng(1);
  const PartialExpr p = PartialExpr::parse("(add U U)");
  std::set<std::string> seen;
  for (int i = 0; i < 2000; ++i) {
    const Expr e = simulate(p, 0, g, 2, rng);
    REQUIRE(e.kind() == NodeKind::Binary);
    REQUIRE(e.op() == Op::Add);
    REQUIRE(e.child(0).is_leaf());
    REQUIRE(e.child(1).is_leaf());
    seen.insert(print(e));
  }
  CHECK(seen.size() == 9);
}

TEST_CASE("simulation of a terminal state returns it unchanged") {
  const OperatorSet g = OperatorSet::mba();
  Rng rng(2);
  const PartialExpr p(add(v(0), v(1)));
  for (int i = 0; i < 50; ++i) CHECK(simulate(p, 5, g, 2, rng) == add(v(0), v(1)));
}

TEST_CASE("simulation respects the operator cap and the grammar") {
  const OperatorSet g = OperatorSet::mba();
  Rng rng(3);
  for (int i = 0; i < 3000; ++i) {
    const Expr e = simulate(PartialExpr(), 50, g, 3, rng, 10);
    REQUIRE(e.size() <= 10);
    REQUIRE(g.admits(e));
    REQUIRE(e.min_arity() <= 3);
  }
}

TEST_CASE("random playouts of a multiplicative target are widely spread") {
  const Expr target = parse("(mul (and v0 v1) (add v1 v2))");
  const SampleSet s = samples_of(target, 3);
  const OperatorSet g = OperatorSet::mba();
  Rng rng(4);
  std::vector<double> d;
  for (int i = 0; i < 500; ++i) d.push_back(distance(Objective::LogArith, simulate(PartialExpr(), 4, g, 3, rng), s));
  std::sort(d.begin(), d.end());
  CHECK(d.back() - d.front() > 100.0);
}

TEST_CASE("reward is bounded and decreasing") {
  CHECK(mcts_reward(0.0, 50) == 1.0);
  double prev = 1.0;
  for (double t : {1.0, 10.0, 100.0, 1000.0, 1e6}) {
    const double r = mcts_reward(t, 50);
    CHECK(r > 0.0);
    CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("MCTS recovers x + y") {
  const SampleSet s = samples_of(add(v(0), v(1)), 2);
  MctsConfig cfg;
  cfg.operator_set = OperatorSet::mba();
  cfg.timeout = 60;
  MctsStats stats;
  const SearchResult r = mcts_synthesize(s, cfg, &stats);
  CHECK(r.status == SearchStatus::Exact);
  CHECK(r.final_distance == 0.0);
  CHECK(stats.visit_counts_consistent);
  CHECK(stats.tree_nodes >= 1);
}

TEST_CASE("a single iteration yields a complete expression") {
  const SampleSet s = samples_of(parse("(mul (xor v0 v1) (add v2 v0))"), 3);
  MctsConfig cfg;
  cfg.max_iterations = 1;
  cfg.seed = 5;
  MctsStats stats;
  const SearchResult r = mcts_synthesize(s, cfg, &stats);
  CHECK(r.status != SearchStatus::Failure);
  CHECK(r.iterations >= 1);
  CHECK(r.final_distance == distance(cfg.objective, r.expr, s));
  CHECK(stats.visit_counts_consistent);
}

TEST_CASE("visit bookkeeping and determinism over many iterations") {
  const SampleSet s = samples_of(parse("(sub (mul v0 v1) (or v1 v2))"), 3);
  MctsConfig cfg;
  cfg.max_iterations = 3000;
  cfg.timeout = 600;
  cfg.seed = 6;
  MctsStats a, b;
  const SearchResult ra = mcts_synthesize(s, cfg, &a);
  const SearchResult rb = mcts_synthesize(s, cfg, &b);
  CHECK(a.visit_counts_consistent);
  CHECK(ra.expr == rb.expr);
  CHECK(ra.iterations == rb.iterations);
  CHECK(a.tree_nodes == b.tree_nodes);
  for (std::size_t i = 1; i < ra.distance_trace.size(); ++i)
    CHECK(ra.distance_trace[i].distance < ra.distance_trace[i - 1].distance);
}

TEST_CASE("MCTS through the generic entry point") {
  const SampleSet s = samples_of(sub(v(0), v(1)), 2);
  SearchConfig cfg;
  cfg.heuristic = Heuristic::MCTS;
  cfg.operator_set = OperatorSet::mba();
  cfg.timeout = 30;
  CHECK(synthesize(s, cfg).status == SearchStatus::Exact);
}

TEST_CASE("configuration checks") {
  MctsConfig cfg;
  cfg.timeout = 0;
  CHECK_THROWS_AS(cfg.validate(), PreconditionError);
  MctsConfig cfg2;
  cfg2.sa_uct = -1;
  CHECK_THROWS_AS(cfg2.validate(), PreconditionError);
}
