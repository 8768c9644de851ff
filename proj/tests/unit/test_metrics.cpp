#include <doctest.h>

#include <sstream>

#include "ilsynth/metrics.hpp"
#include "support.hpp"

using namespace ilsynth;
using namespace ilsynth::build;

namespace {

Expr mba_add() {
  return parse("(sub (sub (mul (or v0 (mul 2 v1)) 2) (xor v0 (mul 2 v1))) v1)");
}

bool balanced(const std::string& s) {
  int depth = 0;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')' && --depth < 0) return false;
  }
  return depth == 0;
}

}  // namespace

TEST_CASE("reduced width per arity") {
  CHECK(reduced_width(1) == 8);
  CHECK(reduced_width(2) == 8);
  CHECK(reduced_width(3) == 6);
  CHECK(reduced_width(4) == 5);
  CHECK(reduced_width(5) == 4);
  CHECK(reduced_width(6) == 3);
}

TEST_CASE("check_equiv examples") {
  const EquivVerdict diff = check_equiv(add(v(0), v(1)), sub(v(0), v(1)));
  REQUIRE(diff.has_counterexample());
  CHECK(diff.inputs() == std::vector<Word>{0, 1});

  const EquivVerdict ann = check_equiv(band(v(0), c(0)), c(0), {}, 1);
  CHECK_FALSE(ann.has_counterexample());
  CHECK(ann.mode() == EquivMode::ExhaustiveReducedWidth);

  const EquivVerdict eq1 = check_equiv(add(v(0), v(1)), mba_add());
  CHECK_FALSE(eq1.has_counterexample());
  CHECK(eq1.mode() == EquivMode::ExhaustiveReducedWidth);
  CHECK(eq1.trials() >= 1'000'000);
}

TEST_CASE("reduced-width agreement does not hide full-width differences") {
  // Agrees on every 8-bit input, differs once bit 8 matters.
  const Expr a = band(v(0), c(0xFFu));
  const EquivVerdict r = check_equiv(a, v(0), {}, 1);
  REQUIRE(r.has_counterexample());
  CHECK(evaluate(a, r.inputs()) != r.inputs()[0]);
}

TEST_CASE("reduced-width mismatches downgrade the verdict") {
  // Equal at 32 bits but not at 8: shifting by 31 only behaves at full width.
  const Expr a = Expr::binary(Op::Lshr, Expr::binary(Op::Shl, v(0), c(31)), c(31));
  const Expr b = band(v(0), c(1));
  const EquivVerdict r = check_equiv(a, b, {}, 1);
  CHECK_FALSE(r.has_counterexample());
  CHECK(r.mode() == EquivMode::RandomFullWidth);
}

TEST_CASE("counterexamples are re-verified on construction") {
  CHECK_THROWS(EquivVerdict::counterexample(add(v(0), v(1)), add(v(1), v(0)), {3, 4}));
  CHECK_NOTHROW(EquivVerdict::counterexample(add(v(0), v(1)), sub(v(0), v(1)), {3, 4}));
}

TEST_CASE("every counterexample distinguishes the pair") {
  std::mt19937_64 rng(41);
  const auto ops = OperatorSet::expr().operators;
  EquivBudget budget;
  budget.random_trials = 2000;
  for (int t = 0; t < 300; ++t) {
    const Expr a = testsupport::random_tree(rng, 3, 2, ops);
    const Expr b = testsupport::random_tree(rng, 3, 2, ops);
    const EquivVerdict r = check_equiv(a, b, budget, 2);
    if (r.has_counterexample()) REQUIRE(evaluate(a, r.inputs()) != evaluate(b, r.inputs()));
  }
}

TEST_CASE("quality") {
  CHECK(quality(add(v(0), v(1)), add(v(0), v(1))) == 1.0);
  const Expr six = parse("(add (add (add (add (add (add v0 v1) v0) v1) v0) v1) v0)");
  REQUIRE(six.size() == 6);
  const Expr five = parse("(add (add (add (add (add v0 v1) v0) v1) v0) v1)");
  const Expr twelve = add(five, six);
  REQUIRE(twelve.size() == 12);
  CHECK(quality(six, twelve) == 0.5);
  CHECK(quality(add(v(0), v(1)), v(0)) == std::nullopt);
}

TEST_CASE("SMT-LIB export") {
  const std::string s = export_smt2(add(v(0), v(1)), mba_add());
  CHECK(balanced(s));
  CHECK(s.find("(declare-fun v0 () (_ BitVec 32))") != std::string::npos);
  CHECK(s.find("(declare-fun v1 () (_ BitVec 32))") != std::string::npos);
  CHECK(s.find("(assert (not (=") != std::string::npos);
  CHECK(s.find("(check-sat)") != std::string::npos);
  CHECK(smt2_term(add(v(0), c(1))) == "(bvadd v0 (_ bv1 32))");
  CHECK(smt2_term(Expr::ite_eq(v(2), 3, v(0), v(1))) == "(ite (= v2 (_ bv3 32)) v0 v1)");
  CHECK(balanced(smt2_term(Expr::binary(Op::Concat, v(0), v(1)))));
}

TEST_CASE("corpus of ten copies of x+y") {
  std::vector<CorpusEntry> corpus;
  for (int i = 0; i < 10; ++i) corpus.push_back({"t" + std::to_string(i), add(v(0), v(1)), 2, "mba"});
  RunConfig cfg;
  cfg.search.timeout = 30;
  cfg.equiv.random_trials = 20000;
  const EvalReport r = evaluate_corpus(corpus, cfg);
  REQUIRE(r.tasks == 10);
  CHECK(r.success_rate == 1.0);
  CHECK(r.equiv_lower == 1.0);
  CHECK(r.equiv_upper == 1.0);
  REQUIRE(r.mean_quality);
  CHECK(*r.mean_quality >= 1.0);
  for (std::size_t i = 0; i < 10; ++i) CHECK(r.records[i].id == "t" + std::to_string(i));
}

TEST_CASE("empty corpus") {
  const EvalReport r = evaluate_corpus({}, RunConfig{});
  CHECK(r.tasks == 0);
  CHECK_FALSE(r.mean_quality.has_value());
  CHECK_FALSE(r.mean_time.has_value());
  std::ostringstream os;
  write_summary(os, r);
  CHECK(os.str().find("tasks: 0") != std::string::npos);
}

TEST_CASE("aggregates are recomputable and ordered") {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 500; ++t) {
    EvalReport r;
    const int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) {
      TaskRecord rec;
      rec.status = rng() % 2 ? SearchStatus::Exact : SearchStatus::Best;
      if (rec.status == SearchStatus::Exact) {
        rec.equiv = static_cast<EquivOutcome>(1 + rng() % 3);
        rec.quality = static_cast<double>(rng() % 10) / 4.0;
      }
      rec.time = static_cast<double>(rng() % 100);
      r.records.push_back(rec);
    }
    r.aggregate();
    REQUIRE(r.equiv_lower <= r.equiv_upper);
    REQUIRE(r.equiv_upper <= r.success_rate);
    std::size_t exact = 0;
    for (const auto& rec : r.records) exact += rec.status == SearchStatus::Exact;
    REQUIRE(r.success_rate == doctest::Approx(static_cast<double>(exact) / n));
  }
}

TEST_CASE("per-task failures are recorded, not thrown") {
  std::vector<CorpusEntry> corpus{{"bad", add(v(0), v(5)), 2, ""}, {"ok", v(0), 1, ""}};
  RunConfig cfg;
  cfg.search.timeout = 5;
  const EvalReport r = evaluate_corpus(corpus, cfg);
  REQUIRE(r.records.size() == 2);
  CHECK(r.records[0].status == SearchStatus::Failure);
  CHECK_FALSE(r.records[0].error.empty());
  CHECK(r.records[1].status == SearchStatus::Exact);
}

TEST_CASE("CSV rows") {
  EvalReport r;
  TaskRecord rec;
  rec.id = "a";
  rec.status = SearchStatus::Exact;
  rec.equiv = EquivOutcome::ExhaustiveReducedWidth;
  rec.quality = 1.0;
  rec.expr = "(add v0 v1)";
  r.records.push_back(rec);
  r.aggregate();
  std::ostringstream os;
  CsvOptions opts;
  opts.include_time = false;
  opts.leading = {{"heuristic", "ils"}};
  write_csv(os, r, opts);
  const std::string text = os.str();
  CHECK(text.rfind("heuristic,id,status,distance,equiv", 0) == 0);
  CHECK(text.find("ils,a,exact") != std::string::npos);
  std::ostringstream js;
  write_json_lines(js, r);
  CHECK(js.str().find("\"id\":\"a\"") != std::string::npos);
}

TEST_CASE("same seed, same records") {
  std::vector<CorpusEntry> corpus{{"a", parse("(mul (add v0 v1) v2)"), 3, ""}, {"b", parse("(xor v0 v1)"), 2, ""}};
  RunConfig cfg;
  cfg.search.timeout = 600;
  cfg.search.max_iterations = 5000;
  cfg.equiv.random_trials = 1000;
  cfg.seed = 3;
  const EvalReport a = evaluate_corpus(corpus, cfg);
  const EvalReport b = evaluate_corpus(corpus, cfg);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a.records[i].expr == b.records[i].expr);
    CHECK(a.records[i].iterations == b.records[i].iterations);
  }
}
