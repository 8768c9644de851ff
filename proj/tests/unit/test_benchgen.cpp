#include <doctest.h>

#include <filesystem>
#include <set>

#include "ilsynth/benchgen.hpp"
#include "ilsynth/simplify.hpp"
#include "support.hpp"

using namespace ilsynth;
using namespace ilsynth::build;

namespace {

EquivBudget quick_budget() {
  EquivBudget b;
  b.random_trials = 20000;
  return b;
}

bool leaves_are_vars(const Expr& e) {
  if (e.kind() == NodeKind::Const) return false;
  for (std::size_t i = 0; i < e.num_children(); ++i)
    if (!leaves_are_vars(e.child(i))) return false;
  return true;
}

void collect_vars(const Expr& e, std::set<unsigned>& out) {
  if (e.kind() == NodeKind::Var) out.insert(e.var_index());
  for (std::size_t i = 0; i < e.num_children(); ++i) collect_vars(e.child(i), out);
}

// Datasets 1 and 2 spelled out by hand.
const char* kDataset1[] = {
    "+-", "+*", "+&", "+|", "+^", "-*", "-&", "-|", "-^", "*&",
    "*|", "*^", "&|", "&^", "|^", "-+", "*+", "*-", "&+", "&-",
};
const char* kDataset2[] = {
    "+-*", "+-&", "+-|", "+-^", "+*&", "+*|", "+*^", "+&|", "+&^", "+|^",
    "-*&", "-*|", "-*^", "-&|", "-&^", "-|^", "*&|", "*&^", "*|^", "&|^",
};

Expr handler(char op) {
  const Expr x = v(0), y = v(1);
  switch (op) {
    case '+': return add(x, y);
    case '-': return sub(x, y);
    case '*': return mul(x, y);
    case '&': return band(x, y);
    case '|': return bor(x, y);
    default: return bxor(x, y);
  }
}

Expr nested(const std::string& ops, unsigned k = 0) {
  if (k + 1 == ops.size()) return handler(ops[k]);
  return Expr::ite_eq(v(2), k, handler(ops[k]), nested(ops, k + 1));
}

std::size_t count_ite(const Expr& e) {
  std::size_t n = e.kind() == NodeKind::IteEqConst;
  for (std::size_t i = 0; i < e.num_children(); ++i) n += count_ite(e.child(i));
  return n;
}

}  // namespace

TEST_CASE("canonical renaming") {
  CHECK(canonicalize(parse("(add v3 v1)")) == parse("(add v0 v1)"));
  CHECK(canonicalize(parse("(sub (mul v2 v0) v2)")) == parse("(sub (mul v0 v1) v0)"));
  CHECK(canonicalize(parse("(add v1 v0)")) == canonicalize(parse("(add v0 v1)")));
}

TEST_CASE("a one-expression spec") {
  BenchSpec spec;
  spec.per_category = {0, 0, 1};
  spec.per_arity = {1, 0, 0, 0, 0};
  spec.max_height = 1;
  const auto es = gen_bench(spec);
  REQUIRE(es.size() == 1);
  CHECK(es[0].expr.height() == 1);
  CHECK(es[0].arity == 2);
  CHECK(category_operators(Category::MBA).size() == OperatorSet::mba().operators.size());
}

TEST_CASE("default spec: 370 per category, 150/600/180/90/90 by arity") {
  BenchSpec spec;
  spec.seed = 7;
  const auto es = gen_bench(spec);
  REQUIRE(es.size() == 1110);
  std::array<std::size_t, 3> by_cat{};
  std::array<std::size_t, 5> by_arity{};
  std::set<std::string> canon;
  for (const auto& e : es) {
    ++by_cat[static_cast<int>(e.category)];
    ++by_arity[e.arity - 2];
    REQUIRE(e.expr.height() <= 3);
    REQUIRE(leaves_are_vars(e.expr));
    std::set<unsigned> vars;
    collect_vars(e.expr, vars);
    REQUIRE(vars.size() == e.arity);
    REQUIRE(*vars.rbegin() == e.arity - 1);
    OperatorSet g;
    g.operators = category_operators(e.category);
    REQUIRE(g.admits(e.expr));
    REQUIRE(simplify(e.expr) == e.expr);
    canon.insert(print(canonicalize(e.expr)));
  }
  CHECK(by_cat == std::array<std::size_t, 3>{370, 370, 370});
  CHECK(by_arity == std::array<std::size_t, 5>{150, 600, 180, 90, 90});
  CHECK(canon.size() == es.size());
}

TEST_CASE("generation is seeded") {
  BenchSpec spec;
  spec.per_category = {5, 5, 5};
  spec.per_arity = {5, 5, 5, 0, 0};
  spec.seed = 3;
  const auto a = gen_bench(spec), b = gen_bench(spec);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].expr == b[i].expr);
}

TEST_CASE("infeasible specs") {
  BenchSpec spec;
  spec.per_category = {0, 0, 1};
  spec.per_arity = {0, 0, 0, 0, 1};
  spec.max_height = 1;
  CHECK_THROWS_AS(gen_bench(spec), GenerationError);
  BenchSpec bad;
  bad.per_category = {1, 0, 0};
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
  BenchSpec tall;
  tall.max_height = 0;
  CHECK_THROWS_AS(tall.validate(), PreconditionError);
}

TEST_CASE("spec JSON") {
  const BenchSpec s = BenchSpec::from_json(R"({"categories":{"mba":4},"arities":{"3":4},"max_height":2,"seed":9})");
  CHECK(s.per_category == std::array<std::size_t, 3>{0, 0, 4});
  CHECK(s.per_arity == std::array<std::size_t, 5>{0, 4, 0, 0, 0});
  CHECK(s.max_height == 2);
  CHECK(s.seed == 9);
  const BenchSpec back = BenchSpec::from_json(s.to_json());
  CHECK(back.per_category == s.per_category);
  CHECK(back.per_arity == s.per_arity);
}

TEST_CASE("corpus files round-trip") {
  BenchSpec spec;
  spec.per_category = {2, 2, 2};
  spec.per_arity = {2, 2, 2, 0, 0};
  spec.seed = 4;
  const auto es = gen_bench(spec);
  const auto dir = std::filesystem::temp_directory_path() / "ilsynth_corpus_test";
  std::filesystem::remove_all(dir);
  write_corpus(dir, es, spec);
  const auto back = read_corpus(dir);
  REQUIRE(back.size() == es.size());
  for (std::size_t i = 0; i < es.size(); ++i) {
    CHECK(back[i].id == es[i].id);
    CHECK(back[i].target == es[i].expr);
    CHECK(back[i].arity == es[i].arity);
    CHECK(back[i].category == category_name(es[i].category));
  }
  const auto plain = read_corpus(dir / "corpus.expr");
  CHECK(plain.size() == es.size());
}

TEST_CASE("three-part encoding of x + y") {
  const Expr x = v(0), y = v(1), a = v(2);
  const Expr e1 = sub(sub(a, mul(x, x)), mul(x, y));
  const Expr e2 = mul(sub(y, band(a, x)), bxor(y, x));
  const HandlerEncoding enc = encode_complex(add(x, y), {e1, e2}, Combiner::AddFold);
  REQUIRE(enc.parts.size() == 3);
  CHECK(enc.parts[0] == add(add(x, y), neg(e1)));
  CHECK(enc.parts[1] == add(e1, neg(e2)));
  CHECK(enc.parts[2] == e2);
  CHECK_FALSE(check_equiv(enc.fold(), add(x, y), quick_budget(), 3).has_counterexample());
}

TEST_CASE("a single decoy telescopes") {
  const Expr h = bor(v(0), v(1)), e = mul(v(0), v(2));
  for (Combiner cb : {Combiner::AddFold, Combiner::XorFold}) {
    const HandlerEncoding enc = encode_complex(h, {e}, cb);
    REQUIRE(enc.parts.size() == 2);
    CHECK(enc.parts[1] == e);
    CHECK_FALSE(check_equiv(enc.fold(), h, quick_budget(), 3).has_counterexample());
  }
  CHECK_THROWS_AS(encode_complex(h, {}, Combiner::AddFold), PreconditionError);
}

TEST_CASE("random encodings fold back to the handler") {
  Rng rng(51);
  const auto ops = OperatorSet::mba().operators;
  for (int t = 0; t < 100; ++t) {
    const Expr h = random_expr_of_size(ops, 3, 1 + rng() % 3, rng);
    std::vector<Expr> decoys;
    const std::size_t n = 1 + rng() % 3;
    for (std::size_t i = 0; i < n; ++i) decoys.push_back(random_expr_of_size(ops, 3, 1 + rng() % 6, rng));
    const Combiner cb = t % 2 ? Combiner::XorFold : Combiner::AddFold;
    const HandlerEncoding enc = encode_complex(h, decoys, cb);
    REQUIRE(enc.parts.size() == n + 1);
    REQUIRE_FALSE(check_equiv(enc.fold(), h, quick_budget(), 3).has_counterexample());
  }
}

TEST_CASE("BP1 and BP2 tables: part size statistics") {
  struct Expect {
    Profile p;
    std::size_t total, min, max;
    unsigned arity;
  };
  for (const Expect& ex : {Expect{Profile::BP1, 103, 4, 11, 3}, Expect{Profile::BP2, 193, 8, 21, 6}}) {
    const auto hs = protected_handlers(ex.p);
    REQUIRE(hs.size() == 5);
    std::size_t total = 0, lo = 1000, hi = 0, n = 0;
    for (const auto& h : hs) {
      CHECK(h.arity == ex.arity);
      REQUIRE(h.encoding.parts.size() == 3);
      for (const auto& part : h.encoding.parts) {
        total += part.size();
        lo = std::min(lo, part.size());
        hi = std::max(hi, part.size());
        ++n;
      }
      CHECK_FALSE(check_equiv(h.encoding.fold(), h.encoding.original, quick_budget(), ex.arity).has_counterexample());
    }
    CHECK(n == 15);
    CHECK(total == ex.total);
    CHECK(lo == ex.min);
    CHECK(hi == ex.max);
  }
  CHECK(static_cast<double>(103) / 15 == doctest::Approx(6.87).epsilon(1e-3));
  CHECK(static_cast<double>(193) / 15 == doctest::Approx(12.87).epsilon(1e-3));
}

TEST_CASE("BP3 handlers are large and still correct") {
  const auto hs = protected_handlers(Profile::BP3, 5);
  REQUIRE(hs.size() == 5);
  for (const auto& h : hs) {
    CHECK(h.arity == 6);
    CHECK_FALSE(check_equiv(h.encoding.fold(), h.encoding.original, quick_budget(), 6).has_counterexample());
  }
}

TEST_CASE("merged datasets 1 and 2 match the hand-written lists") {
  const auto d1 = merged_dataset(1), d2 = merged_dataset(2);
  REQUIRE(d1.size() == 20);
  REQUIRE(d2.size() == 20);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(d1[i] == nested(kDataset1[i]));
    CHECK(d2[i] == nested(kDataset2[i]));
  }
  for (unsigned k = 1; k <= 5; ++k) {
    const auto d = merged_dataset(k);
    CHECK(d.size() == 20);
    std::set<std::string> uniq;
    for (const auto& e : d) {
      CHECK(count_ite(e) == k);
      uniq.insert(print(e));
    }
    CHECK(uniq.size() == 20);
  }
  CHECK_THROWS_AS(merged_dataset(0), PreconditionError);
}

TEST_CASE("two handlers merged") {
  const MergedHandler m = gen_merged({add(v(0), v(1)), sub(v(0), v(1))}, 2);
  for (const Expr& e : {m.with_ite, m.branchless}) {
    CHECK(evaluate(e, std::vector<Word>{9, 4, 0}) == 13u);
    CHECK(evaluate(e, std::vector<Word>{9, 4, 5}) == 5u);
  }
  CHECK(count_ite(m.with_ite) == 1);
  CHECK(count_ite(m.branchless) == 0);
  CHECK_THROWS_AS(gen_merged({add(v(0), v(1))}, 2), PreconditionError);
}

TEST_CASE("branchless mask is zero exactly on equality") {
  // cond = v0, compared against v1-independent constants; exhaustive over
  // 16-bit differences plus the sign-boundary edges.
  for (Word cst : {0u, 1u, 7u, 0x80000000u}) {
    const Expr m = branchless_mask(v(0), cst);
    for (Word d = 0; d < (1u << 16); ++d) {
      for (Word diff : {d, static_cast<Word>(-static_cast<std::int32_t>(d))}) {
        const Word c = cst + diff;
        REQUIRE(evaluate(m, std::vector<Word>{c}) == (c == cst ? 0u : 1u));
      }
    }
    for (Word diff : {0x80000000u, 0x7FFFFFFFu, 0x80000001u, 0xFFFFFFFFu}) {
      const Word c = cst + diff;
      REQUIRE(evaluate(m, std::vector<Word>{c}) == 1u);
    }
  }
}

TEST_CASE("merged twins agree on random inputs") {
  std::mt19937_64 rng(52);
  for (unsigned k = 1; k <= 5; ++k) {
    std::vector<Expr> hs;
    for (std::size_t i = 0; i <= k; ++i) hs.push_back(basic_handlers()[(i * 5 + k) % 6]);
    const MergedHandler m = gen_merged(hs, 2);
    CHECK(count_ite(m.with_ite) == k);
    for (int i = 0; i < 10000; ++i) {
      auto in = testsupport::random_inputs(rng, 3);
      if (i % 2) in[2] = static_cast<Word>(rng() % (k + 2));
      REQUIRE(evaluate(m.with_ite, in) == evaluate(m.branchless, in));
    }
  }
}

TEST_CASE("MBA rewriting preserves semantics and grows syntax") {
  std::mt19937_64 gen(53);
  Rng rng(53);
  const auto ops = OperatorSet::mba().operators;
  for (int t = 0; t < 100; ++t) {
    const Expr e = random_expr_of_size(ops, 3, 1 + rng() % 5, rng);
    const Expr m = mba_encode(e);
    CHECK(m.size() >= e.size());
    for (int i = 0; i < 200; ++i) {
      const auto in = testsupport::random_inputs(gen, 3);
      REQUIRE(evaluate(m, in) == evaluate(e, in));
    }
  }
  CHECK(mba_encode(add(v(0), v(1))) ==
        parse("(sub (sub (mul (or v0 (mul 2 v1)) 2) (xor v0 (mul 2 v1))) v1)"));
}
