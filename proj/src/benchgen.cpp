#include "ilsynth/benchgen.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "ilsynth/simplify.hpp"

namespace ilsynth {

using namespace build;
using json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kCategoryNames[] = {"boolean", "arith", "mba"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

}  // namespace

std::string_view category_name(Category c) { return kCategoryNames[static_cast<int>(c)]; }

Category category_from_name(std::string_view name) {
  const std::string n = lower(name);
  for (int i = 0; i < 3; ++i)
    if (n == kCategoryNames[i]) return static_cast<Category>(i);
  throw PreconditionError("unknown category '" + std::string(name) + "'");
}

std::vector<Op> category_operators(Category c) {
  switch (c) {
    case Category::Boolean:
      return {Op::Not, Op::And, Op::Or, Op::Xor};
    case Category::Arith:
      return {Op::Neg, Op::Add, Op::Sub, Op::Mul};
    case Category::MBA:
      return OperatorSet::mba().operators;
  }
  return {};
}

std::size_t BenchSpec::total() const {
  std::size_t n = 0;
  for (auto c : per_category) n += c;
  return n;
}

void BenchSpec::validate() const {
  std::size_t by_arity = 0;
  for (auto a : per_arity) by_arity += a;
  if (by_arity != total())
    throw PreconditionError("category counts sum to " + std::to_string(total()) + " but arity counts sum to " +
                            std::to_string(by_arity));
  if (max_height < 1) throw PreconditionError("max_height must be at least 1");
}

BenchSpec BenchSpec::from_json(std::string_view text) {
  BenchSpec spec;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("bench spec: ") + e.what());
  }
  if (j.contains("categories")) {
    spec.per_category.fill(0);
    for (const auto& [k, v] : j["categories"].items())
      spec.per_category[static_cast<int>(category_from_name(k))] = v.get<std::size_t>();
  }
  if (j.contains("arities")) {
    spec.per_arity.fill(0);
    for (const auto& [k, v] : j["arities"].items()) {
      const int a = std::stoi(k);
      if (a < static_cast<int>(kMinBenchArity) || a > static_cast<int>(kMaxBenchArity))
        throw PreconditionError("arity " + k + " outside [2, 6]");
      spec.per_arity[a - kMinBenchArity] = v.get<std::size_t>();
    }
  }
  if (j.contains("max_height")) spec.max_height = j["max_height"].get<unsigned>();
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  spec.validate();
  return spec;
}

std::string BenchSpec::to_json() const {
  json j;
  for (int i = 0; i < 3; ++i) j["categories"][std::string(kCategoryNames[i])] = per_category[i];
  for (unsigned a = kMinBenchArity; a <= kMaxBenchArity; ++a)
    j["arities"][std::to_string(a)] = per_arity[a - kMinBenchArity];
  j["max_height"] = max_height;
  j["seed"] = seed;
  return j.dump();
}

// ---------------------------------------------------------------------------

namespace {

Expr rebuild(const Expr& e, std::array<Expr, 3>& kids) {
  switch (e.kind()) {
    case NodeKind::Unary:
      return Expr::unary(e.op(), kids[0]);
    case NodeKind::Binary:
      return Expr::binary(e.op(), kids[0], kids[1]);
    case NodeKind::IteEqConst:
      return Expr::ite_eq(kids[0], e.value(), kids[1], kids[2]);
    default:
      return e;
  }
}

Expr rename(const Expr& e, std::map<unsigned, unsigned>& names) {
  if (e.kind() == NodeKind::Var) {
    auto [it, fresh] = names.try_emplace(e.var_index(), static_cast<unsigned>(names.size()));
    return Expr::var(it->second);
  }
  if (e.is_leaf()) return e;
  std::array<Expr, 3> kids;
  for (std::size_t i = 0; i < e.num_children(); ++i) kids[i] = rename(e.child(i), names);
  return rebuild(e, kids);
}

/// Random tree shape with placeholder leaves; the root is never a leaf.
Expr random_shape(const std::vector<Op>& ops, unsigned height, bool root, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (height == 0 || (!root && u(rng) < 0.25)) return Expr::var(0);
  const Op op = ops[std::uniform_int_distribution<std::size_t>(0, ops.size() - 1)(rng)];
  if (info(op).arity == 1) return Expr::unary(op, random_shape(ops, height - 1, false, rng));
  Expr l = random_shape(ops, height - 1, false, rng);
  Expr r = random_shape(ops, height - 1, false, rng);
  return Expr::binary(op, std::move(l), std::move(r));
}

Expr fill_leaves(const Expr& e, const std::vector<unsigned>& vars, std::size_t& pos) {
  if (e.is_leaf()) return Expr::var(vars[pos++]);
  std::array<Expr, 3> kids;
  for (std::size_t i = 0; i < e.num_children(); ++i) kids[i] = fill_leaves(e.child(i), vars, pos);
  return rebuild(e, kids);
}

std::size_t count_leaves(const Expr& e) { return e.node_count() - e.size(); }

}  // namespace

Expr canonicalize(const Expr& e) {
  std::map<unsigned, unsigned> names;
  return rename(e, names);
}

std::vector<BenchEntry> gen_bench(const BenchSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  std::vector<Category> cats;
  for (int c = 0; c < 3; ++c) cats.insert(cats.end(), spec.per_category[c], static_cast<Category>(c));
  std::vector<unsigned> arities;
  for (unsigned a = kMinBenchArity; a <= kMaxBenchArity; ++a)
    arities.insert(arities.end(), spec.per_arity[a - kMinBenchArity], a);
  std::shuffle(arities.begin(), arities.end(), rng);

  for (unsigned a : arities)
    if ((std::size_t{1} << std::min(spec.max_height, 20u)) < a)
      throw GenerationError("arity " + std::to_string(a) + " needs more leaves than height " +
                            std::to_string(spec.max_height) + " allows");

  std::unordered_set<Expr, ExprHash> seen;
  std::vector<BenchEntry> out;
  out.reserve(cats.size());
  constexpr int kMaxAttempts = 200000;
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const Category cat = cats[i];
    const unsigned arity = arities[i];
    const std::vector<Op> ops = category_operators(cat);
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      const Expr shape = random_shape(ops, spec.max_height, true, rng);
      const std::size_t leaves = count_leaves(shape);
      if (leaves < arity) continue;
      std::vector<unsigned> vars(leaves);
      for (std::size_t k = 0; k < leaves; ++k)
        vars[k] = k < arity ? static_cast<unsigned>(k)
                            : std::uniform_int_distribution<unsigned>(0, arity - 1)(rng);
      std::shuffle(vars.begin(), vars.end(), rng);
      std::size_t pos = 0;
      const Expr e = canonicalize(fill_leaves(shape, vars, pos));
      if (simplify(e) != e) continue;
      if (!seen.insert(e).second) continue;
      out.push_back({std::to_string(i), e, cat, arity});
      placed = true;
    }
    if (!placed)
      throw GenerationError("could not find a fresh " + std::string(category_name(cat)) + " expression of arity " +
                            std::to_string(arity) + " and height <= " + std::to_string(spec.max_height));
  }
  return out;
}

Expr random_expr_of_size(const std::vector<Op>& ops, unsigned arity, std::size_t n_ops, Rng& rng) {
  if (arity == 0) throw PreconditionError("random expression needs at least one input");
  if (n_ops == 0) return Expr::var(std::uniform_int_distribution<unsigned>(0, arity - 1)(rng));
  const Op op = ops[std::uniform_int_distribution<std::size_t>(0, ops.size() - 1)(rng)];
  if (info(op).arity == 1) return Expr::unary(op, random_expr_of_size(ops, arity, n_ops - 1, rng));
  const std::size_t left = std::uniform_int_distribution<std::size_t>(0, n_ops - 1)(rng);
  Expr l = random_expr_of_size(ops, arity, left, rng);
  Expr r = random_expr_of_size(ops, arity, n_ops - 1 - left, rng);
  return Expr::binary(op, std::move(l), std::move(r));
}

void write_corpus(const std::filesystem::path& dir, const std::vector<BenchEntry>& entries, const BenchSpec& spec) {
  std::filesystem::create_directories(dir);
  std::ofstream corpus(dir / "corpus.expr");
  if (!corpus) throw Error("cannot write " + (dir / "corpus.expr").string());
  json manifest;
  manifest["spec"] = json::parse(spec.to_json());
  manifest["entries"] = json::array();
  for (const auto& e : entries) {
    corpus << print(e.expr) << '\n';
    manifest["entries"].push_back({{"id", e.id},
                                   {"category", category_name(e.category)},
                                   {"arity", e.arity},
                                   {"height", e.expr.height()},
                                   {"seed", spec.seed}});
  }
  std::ofstream m(dir / "manifest.json");
  if (!m) throw Error("cannot write " + (dir / "manifest.json").string());
  m << manifest.dump(2) << '\n';
}

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<CorpusEntry> read_corpus(const std::filesystem::path& path) {
  const bool is_dir = std::filesystem::is_directory(path);
  const auto file = is_dir ? path / "corpus.expr" : path;
  const std::vector<Expr> exprs = parse_lines(slurp(file));
  std::vector<CorpusEntry> out;
  out.reserve(exprs.size());
  for (std::size_t i = 0; i < exprs.size(); ++i) out.push_back({std::to_string(i), exprs[i], exprs[i].min_arity(), ""});

  if (is_dir && std::filesystem::exists(path / "manifest.json")) {
    const json m = json::parse(slurp(path / "manifest.json"));
    const auto& entries = m.at("entries");
    if (entries.size() != out.size())
      throw Error("manifest lists " + std::to_string(entries.size()) + " entries, corpus has " +
                  std::to_string(out.size()));
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto& e = entries[i];
      if (e.contains("id")) out[i].id = e["id"].get<std::string>();
      if (e.contains("category")) out[i].category = e["category"].get<std::string>();
      if (e.contains("arity")) out[i].arity = std::max(out[i].arity, e["arity"].get<unsigned>());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Complex handlers

std::string_view combiner_name(Combiner c) { return c == Combiner::AddFold ? "add" : "xor"; }

Expr fold(const std::vector<Expr>& parts, Combiner combiner) {
  if (parts.empty()) throw PreconditionError("nothing to fold");
  Expr acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i)
    acc = combiner == Combiner::AddFold ? add(acc, parts[i]) : bxor(acc, parts[i]);
  return acc;
}

Expr HandlerEncoding::fold() const { return ilsynth::fold(parts, combiner); }

HandlerEncoding encode_complex(const Expr& h, const std::vector<Expr>& decoys, Combiner combiner) {
  if (decoys.empty()) throw PreconditionError("encode_complex needs at least one decoy");
  // a * inv(b): a + -b for the additive group, a ^ b for xor.
  auto step = [combiner](const Expr& a, const Expr& b) {
    return combiner == Combiner::AddFold ? add(a, neg(b)) : bxor(a, b);
  };
  HandlerEncoding enc{h, {}, combiner};
  enc.parts.push_back(step(h, decoys.front()));
  for (std::size_t i = 0; i + 1 < decoys.size(); ++i) enc.parts.push_back(step(decoys[i], decoys[i + 1]));
  enc.parts.push_back(decoys.back());
  return enc;
}

std::string_view profile_name(Profile p) {
  switch (p) {
    case Profile::BP1:
      return "bp1";
    case Profile::BP2:
      return "bp2";
    case Profile::BP3:
      return "bp3";
  }
  return "?";
}

Profile profile_from_name(std::string_view name) {
  const std::string n = lower(name);
  if (n == "bp1") return Profile::BP1;
  if (n == "bp2") return Profile::BP2;
  if (n == "bp3") return Profile::BP3;
  throw PreconditionError("unknown profile '" + std::string(name) + "'");
}

DecoyShape decoy_shape(Profile p) {
  switch (p) {
    case Profile::BP1:
      return {3, 4};
    case Profile::BP2:
      return {6, 9};
    case Profile::BP3:
      return {6, 63};
  }
  return {3, 4};
}

namespace {

struct TableRow {
  const char* name;
  const char* original;
  Combiner combiner;
  const char* parts[3];
};

// x = v0, y = v1, a = v2
const TableRow kBp1[] = {
    {"add", "(add v0 v1)", Combiner::AddFold,
     {"(add (add v0 v1) (neg (sub (sub v2 (mul v0 v0)) (mul v0 v1))))",
      "(add (sub (sub v2 (mul v0 v0)) (mul v0 v1)) (mul (neg (sub v1 (and v2 v0))) (xor v1 v0)))",
      "(mul (sub v1 (and v2 v0)) (xor v1 v0))"}},
    {"sub", "(sub v0 v1)", Combiner::AddFold,
     {"(add (sub v0 v1) (neg (sub (mul v0 v2) (or v1 v2))))",
      "(add (sub (mul v0 v2) (or v1 v2)) (neg (mul (xor (add (and v1 v2) v0) v1) v0)))",
      "(mul (xor (add (and v1 v2) v0) v1) v0)"}},
    {"mul", "(mul v0 v1)", Combiner::AddFold,
     {"(add (mul v0 v1) (neg (sub (mul v0 (mul v2 v2)) (mul v0 v1))))",
      "(add (sub (mul v0 (mul v2 v2)) (mul v0 v1)) (neg (sub (xor v0 v1) (mul v2 (add v0 v1)))))",
      "(sub (xor v0 v1) (mul v2 (add v0 v1)))"}},
    {"and", "(and v0 v1)", Combiner::XorFold,
     {"(xor (and v0 v1) (or (mul (and v0 v2) (and v0 v2)) v1))",
      "(xor (or (mul (and v0 v2) (and v0 v2)) v1) (sub (mul v1 v2) (add (xor v0 v2) v1)))",
      "(sub (mul v1 v2) (add (xor v0 v2) v1))"}},
    {"or", "(or v0 v1)", Combiner::AddFold,
     {"(add (or v0 v1) (neg (mul (add (mul v1 v2) v0) (add (mul v1 v2) v0))))",
      "(add (mul (add (mul v1 v2) v0) (add (mul v1 v2) v0)) (neg (xor (mul v0 v2) (sub v1 (and v0 v2)))))",
      "(xor (mul v0 v2) (sub v1 (and v0 v2)))"}},
};

// x = v0, y = v1, a = v2, b = v3, c = v4, d = v5
#define BP2_ADD_A "(xor (not (mul v0 (mul v1 v1))) (or (neg v2) v3))"
#define BP2_ADD_B "(mul v0 (and v5 v4))"
#define BP2_ADD_E2 "(and (or (not v0) (mul v3 v5)) (xor (sub (sub v2 v1) v5) (and (neg v4) (sub v5 v0))))"
#define BP2_SUB_E1 "(sub (mul (xor v1 v4) (and v0 (neg (or v4 (mul v3 v3))))) (add v2 (and v3 (not v5))))"
#define BP2_SUB_E2 "(xor (and (sub v5 (or v3 (not v1))) (add v4 v2)) (mul v0 (neg v2)))"
#define BP2_MUL_E1 "(xor (and (add v1 (not v5)) (mul v0 v2)) (or (neg v3) (sub v4 v2)))"
#define BP2_MUL_E2 "(and (xor (or v5 (neg v3)) (mul (sub v0 v1) (sub v0 v1))) (add (not v2) v4))"
#define BP2_AND_E1 "(sub (and (add v0 v5) (mul v1 (not (xor v3 (neg v2))))) (or v4 v3))"
#define BP2_AND_E2 "(xor (sub (and v5 v3) (or (mul v1 v1) (neg v2))) (add v0 (not v4)))"
#define BP2_OR_E1 "(and (xor (or (mul v4 v5) (sub v2 v3)) (sub (neg v0) (not v1))) v4)"
#define BP2_OR_E2 "(mul (xor (sub (not v4) (or v0 (neg v3))) (add v1 (and v2 v1))) v5)"

const TableRow kBp2[] = {
    {"add", "(add v0 v1)", Combiner::AddFold,
     {"(sub (add (add v0 v1) " BP2_ADD_A ") " BP2_ADD_B ")",
      "(add (neg (sub " BP2_ADD_A " " BP2_ADD_B ")) " BP2_ADD_E2 ")", "(neg " BP2_ADD_E2 ")"}},
    {"sub", "(sub v0 v1)", Combiner::AddFold,
     {"(add (sub v0 v1) " BP2_SUB_E1 ")", "(add (neg " BP2_SUB_E1 ") " BP2_SUB_E2 ")", "(neg " BP2_SUB_E2 ")"}},
    {"mul", "(mul v0 v1)", Combiner::XorFold,
     {"(xor (mul v0 v1) " BP2_MUL_E1 ")", "(xor " BP2_MUL_E1 " " BP2_MUL_E2 ")", BP2_MUL_E2}},
    {"and", "(and v0 v1)", Combiner::XorFold,
     {"(xor (and v0 v1) " BP2_AND_E1 ")", "(xor " BP2_AND_E1 " " BP2_AND_E2 ")", BP2_AND_E2}},
    {"or", "(or v0 v1)", Combiner::AddFold,
     {"(add (or v0 v1) " BP2_OR_E1 ")", "(add (neg " BP2_OR_E1 ") " BP2_OR_E2 ")", "(neg " BP2_OR_E2 ")"}},
};

std::vector<ProtectedHandler> from_table(std::span<const TableRow> rows, unsigned arity) {
  std::vector<ProtectedHandler> out;
  for (const auto& r : rows) {
    HandlerEncoding enc{parse(r.original), {}, r.combiner};
    for (const char* p : r.parts) enc.parts.push_back(parse(p));
    out.push_back({r.name, std::move(enc), arity});
  }
  return out;
}

}  // namespace

HandlerEncoding encode_random(const Expr& h, std::size_t n_decoys, Profile p, Combiner combiner, Rng& rng) {
  if (n_decoys == 0) throw PreconditionError("encode_random needs at least one decoy");
  const DecoyShape shape = decoy_shape(p);
  const unsigned arity = std::max(shape.arity, h.min_arity());
  const std::size_t lo = std::max<std::size_t>(1, shape.decoy_size * 2 / 3);
  const std::size_t hi = std::max(lo, shape.decoy_size * 4 / 3);
  const std::vector<Op> ops = OperatorSet::mba().operators;
  std::vector<Expr> decoys;
  for (std::size_t i = 0; i < n_decoys; ++i) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    decoys.push_back(random_expr_of_size(ops, arity, n, rng));
  }
  return encode_complex(h, decoys, combiner);
}

std::vector<ProtectedHandler> protected_handlers(Profile p, std::uint64_t seed) {
  if (p == Profile::BP1) return from_table(kBp1, 3);
  if (p == Profile::BP2) return from_table(kBp2, 6);
  Rng rng(seed);
  std::vector<ProtectedHandler> out;
  for (const auto& r : kBp2) {
    ProtectedHandler ph{r.name, encode_random(parse(r.original), 2, Profile::BP3, r.combiner, rng), 6};
    out.push_back(std::move(ph));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Merged handlers

Expr branchless_mask(const Expr& cond, Word cst) {
  const Expr r = sub(cond, c(cst));
  const Expr s = ashr(r, c(31));
  return band(ashr(neg(sub(bxor(r, s), s)), c(31)), c(1));
}

Expr branchless_ite(const Expr& cond, Word cst, const Expr& then_branch, const Expr& else_branch) {
  const Expr res = branchless_mask(cond, cst);
  return add(mul(then_branch, sub(c(1), res)), mul(res, else_branch));
}

MergedHandler gen_merged(const std::vector<Expr>& handlers, unsigned cond_var) {
  if (handlers.size() < 2) throw PreconditionError("merging needs at least two handlers");
  const Expr z = Expr::var(cond_var);
  Expr ite = handlers.back();
  Expr flat = handlers.back();
  for (std::size_t i = handlers.size() - 1; i-- > 0;) {
    ite = Expr::ite_eq(z, static_cast<Word>(i), handlers[i], ite);
    flat = branchless_ite(z, static_cast<Word>(i), handlers[i], flat);
  }
  return {ite, flat};
}

std::vector<Expr> basic_handlers() {
  const Expr x = v(0), y = v(1);
  return {add(x, y), sub(x, y), mul(x, y), band(x, y), bor(x, y), bxor(x, y)};
}

std::vector<Expr> merged_dataset(unsigned nesting) {
  if (nesting < 1 || nesting > 5) throw PreconditionError("merged datasets exist for nesting 1 to 5");
  const std::size_t k = nesting + 1;
  const auto handlers = basic_handlers();
  const std::size_t n = handlers.size();

  // All k-permutations of the six handlers in lexicographic order; the
  // increasing ones come first, then the rest, and the first 20 are kept.
  std::vector<std::vector<std::size_t>> increasing, others;
  std::vector<std::size_t> cur;
  std::vector<bool> used(n, false);
  auto rec = [&](auto& self) -> void {
    if (cur.size() == k) {
      (std::is_sorted(cur.begin(), cur.end()) ? increasing : others).push_back(cur);
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      used[i] = true;
      cur.push_back(i);
      self(self);
      cur.pop_back();
      used[i] = false;
    }
  };
  rec(rec);
  increasing.insert(increasing.end(), others.begin(), others.end());

  std::vector<Expr> out;
  for (std::size_t i = 0; i < 20 && i < increasing.size(); ++i) {
    std::vector<Expr> hs;
    for (auto idx : increasing[i]) hs.push_back(handlers[idx]);
    out.push_back(gen_merged(hs, 2).with_ite);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

Expr mba_node(Op op, const Expr& x, const Expr& y) {
  switch (op) {
    case Op::Add: {
      const Expr y2 = mul(c(2), y);
      return sub(sub(mul(bor(x, y2), c(2)), bxor(x, y2)), y);
    }
    case Op::Sub: {
      const Expr ny = neg(y);
      return add(bxor(x, ny), mul(c(2), band(x, ny)));
    }
    case Op::Xor:
      return sub(bor(x, y), band(x, y));
    case Op::And:
      return sub(add(x, y), bor(x, y));
    case Op::Or:
      return add(bxor(x, y), band(x, y));
    default:
      return Expr::binary(op, x, y);
  }
}

Expr mba_once(const Expr& e) {
  if (e.is_leaf()) return e;
  std::array<Expr, 3> kids;
  for (std::size_t i = 0; i < e.num_children(); ++i) kids[i] = mba_once(e.child(i));
  if (e.kind() == NodeKind::Binary) return mba_node(e.op(), kids[0], kids[1]);
  return rebuild(e, kids);
}

}  // namespace

Expr mba_encode(const Expr& e, unsigned rounds) {
  Expr out = e;
  for (unsigned r = 0; r < rounds; ++r) out = mba_once(out);
  return out;
}

}  // namespace ilsynth
