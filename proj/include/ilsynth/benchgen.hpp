#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ilsynth/expr.hpp"
#include "ilsynth/metrics.hpp"
#include "ilsynth/search.hpp"

namespace ilsynth {

// ---------------------------------------------------------------------------
// Random corpora

enum class Category { Boolean, Arith, MBA };

std::string_view category_name(Category c);
Category category_from_name(std::string_view name);

/// Operators a category draws from.
std::vector<Op> category_operators(Category c);

inline constexpr unsigned kMinBenchArity = 2;
inline constexpr unsigned kMaxBenchArity = 6;

struct BenchSpec {
  /// Indexed by Category.
  std::array<std::size_t, 3> per_category{370, 370, 370};
  /// Indexed by arity - 2, for arities 2..6.
  std::array<std::size_t, 5> per_arity{150, 600, 180, 90, 90};
  unsigned max_height = 3;
  std::uint64_t seed = 0;

  std::size_t total() const;
  /// Throws PreconditionError when the two marginals disagree or height is 0.
  void validate() const;

  /// {"categories": {"boolean": n, ...}, "arities": {"2": n, ...}, "max_height": h, "seed": s};
  /// missing keys keep their defaults, except that a category or arity
  /// table given at all replaces the whole default table.
  static BenchSpec from_json(std::string_view text);
  std::string to_json() const;
};

struct BenchEntry {
  std::string id;
  Expr expr;
  Category category = Category::MBA;
  unsigned arity = 0;
};

/// Variables renumbered by first occurrence in a post-order traversal.
Expr canonicalize(const Expr& e);

/// Random expressions with exactly the declared arity (every variable
/// occurs), variables as the only leaves, height <= max_height, no two
/// entries alpha-equivalent and none that the simplifier can shrink.
/// Throws GenerationError when a (category, arity, height) cell cannot be filled.
std::vector<BenchEntry> gen_bench(const BenchSpec& spec);

/// Random expression over `ops` with exactly `n_ops` operator nodes and
/// variable leaves v0..v{arity-1}.
Expr random_expr_of_size(const std::vector<Op>& ops, unsigned arity, std::size_t n_ops, Rng& rng);

// Corpus directories hold corpus.expr (one expression per line) and manifest.json.

void write_corpus(const std::filesystem::path& dir, const std::vector<BenchEntry>& entries, const BenchSpec& spec);
/// Accepts a corpus directory or a plain expression file; without a manifest,
/// ids are line numbers and the arity is inferred.
std::vector<CorpusEntry> read_corpus(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Semantically complex handlers

enum class Combiner { AddFold, XorFold };

std::string_view combiner_name(Combiner c);

struct HandlerEncoding {
  Expr original;
  std::vector<Expr> parts;
  Combiner combiner = Combiner::AddFold;

  Expr fold() const;
};

Expr fold(const std::vector<Expr>& parts, Combiner combiner);

/// h0 = h * inv(e1), hi = ei * inv(e{i+1}), h{n-1} = e{n-1} under the
/// combiner's group law; throws PreconditionError on an empty decoy list.
HandlerEncoding encode_complex(const Expr& h, const std::vector<Expr>& decoys, Combiner combiner);

enum class Profile { BP1, BP2, BP3 };

std::string_view profile_name(Profile p);
Profile profile_from_name(std::string_view name);

struct ProtectedHandler {
  std::string name;  // add, sub, mul, and, or
  HandlerEncoding encoding;
  unsigned arity = 0;
};

/// The 5 encoded basic operators of a profile: BP1 and BP2 are fixed
/// tables (x, y first, then a, b, c, d); BP3 draws large random
/// MBA decoys over 6 inputs from `seed`.
std::vector<ProtectedHandler> protected_handlers(Profile p, std::uint64_t seed = 0);

/// Arity and decoy operator count used when encoding arbitrary handlers.
struct DecoyShape {
  unsigned arity;
  std::size_t decoy_size;
};
DecoyShape decoy_shape(Profile p);

/// Encodes `h` with `n_decoys` random MBA decoys shaped after the profile.
HandlerEncoding encode_random(const Expr& h, std::size_t n_decoys, Profile p, Combiner combiner, Rng& rng);

// ---------------------------------------------------------------------------
// Merged handlers

struct MergedHandler {
  Expr with_ite;
  Expr branchless;
};

/// Compares input `cond_var` against 0, 1, 2, ... in order: the i-th handler
/// runs when cond == i, the last one otherwise.
MergedHandler gen_merged(const std::vector<Expr>& handlers, unsigned cond_var);

/// One ITE lowered to the arithmetic mask
///   r = c - cst; s = r >>s 31; r = (-((r ^ s) - s) >>s 31) & 1
///   then * (1 - r) + r * else
Expr branchless_ite(const Expr& cond, Word cst, const Expr& then_branch, const Expr& else_branch);
/// The mask r alone: 0 when cond == cst, 1 otherwise.
Expr branchless_mask(const Expr& cond, Word cst);

/// Dataset `nesting` (1..5): 20 merged handlers of nesting+1 basic
/// operations over x=v0, y=v1, selected by z=v2.
std::vector<Expr> merged_dataset(unsigned nesting);

/// The basic handlers x+y, x-y, x*y, x&y, x|y, x^y in dataset order.
std::vector<Expr> basic_handlers();

// ---------------------------------------------------------------------------
// MBA rewriting

/// Rewrites every +, -, ^, & and | node through a mixed boolean-arithmetic
/// identity (x + y -> (x | 2y) * 2 - (x ^ 2y) - y, and similar), `rounds` times.
Expr mba_encode(const Expr& e, unsigned rounds = 1);

}  // namespace ilsynth
