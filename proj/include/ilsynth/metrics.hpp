#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ilsynth/expr.hpp"
#include "ilsynth/mcts.hpp"
#include "ilsynth/oracle.hpp"
#include "ilsynth/search.hpp"

namespace ilsynth {

/// How a NoCounterexample verdict was reached. Neither is a proof at 32 bits:
/// `ExhaustiveReducedWidth` means every input agreed at a reduced width and no
/// full-width random trial disagreed.
enum class EquivMode { ExhaustiveReducedWidth, RandomFullWidth };

std::string_view equiv_mode_name(EquivMode m);

class EquivVerdict {
 public:
  /// Verifies at full width that `inputs` distinguish `a` from `b`.
  static EquivVerdict counterexample(const Expr& a, const Expr& b, std::vector<Word> inputs);
  static EquivVerdict no_counterexample(std::uint64_t trials, EquivMode mode);

  bool has_counterexample() const { return counterexample_.has_value(); }
  const std::vector<Word>& inputs() const { return *counterexample_; }
  std::uint64_t trials() const { return trials_; }
  EquivMode mode() const { return mode_; }

 private:
  std::optional<std::vector<Word>> counterexample_;
  std::uint64_t trials_ = 0;
  EquivMode mode_ = EquivMode::RandomFullWidth;
};

struct EquivBudget {
  std::uint64_t random_trials = 1'000'000;
  /// Upper bound on exhaustively enumerated reduced-width points.
  std::uint64_t exhaustive_points = std::uint64_t{1} << 20;
  unsigned max_reduced_width = 8;
  std::uint64_t seed = 0x5eedULL;
};

/// Width w such that 2^(w * arity) fits the exhaustive budget, capped at
/// `max_reduced_width`.
unsigned reduced_width(unsigned arity, const EquivBudget& budget = {});

/// Testing-based equivalence: exhaustive reduced-width enumeration, then the
/// five constant vectors and random full-width trials. Only full-width
/// disagreements are reported as counterexamples. `arity` 0 means the larger
/// of the two expressions' variable counts.
EquivVerdict check_equiv(const Expr& a, const Expr& b, const EquivBudget& budget = {}, unsigned arity = 0);

/// size(recovered) / size(target); nullopt when the target has no operator.
std::optional<double> quality(const Expr& recovered, const Expr& target);

/// SMT-LIB2 script over 32-bit bitvectors asserting a != b (unsat iff equivalent).
std::string export_smt2(const Expr& a, const Expr& b, unsigned arity = 0);
/// The SMT-LIB2 term for `e`, with variables named v0, v1, ...
std::string smt2_term(const Expr& e);

// ---------------------------------------------------------------------------
// Corpus evaluation

struct CorpusEntry {
  std::string id;
  Expr target;
  unsigned arity = 0;
  std::string category;
};

struct RunConfig {
  Heuristic heuristic = Heuristic::ILS;
  SearchConfig search;
  MctsConfig mcts;
  SamplingStrategy sampling;
  EquivBudget equiv;
  bool simplify_results = true;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

enum class EquivOutcome { NotChecked, Counterexample, ExhaustiveReducedWidth, RandomFullWidth };

std::string_view equiv_outcome_name(EquivOutcome e);

struct TaskRecord {
  std::string id;
  SearchStatus status = SearchStatus::Failure;
  double distance = 0.0;
  EquivOutcome equiv = EquivOutcome::NotChecked;
  std::optional<double> quality;
  double time = 0.0;
  std::uint64_t iterations = 0;
  std::size_t size = 0;
  std::string expr;
  std::string error;
};

struct EvalReport {
  std::vector<TaskRecord> records;
  std::size_t tasks = 0;
  double success_rate = 0.0;
  double equiv_lower = 0.0;
  double equiv_upper = 0.0;
  std::optional<double> mean_quality;
  std::optional<double> mean_time;

  /// Recomputes the aggregates from `records`.
  void aggregate();
};

/// Seeds derived for task `index` of a run seeded with `seed`.
std::uint64_t task_seed(std::uint64_t seed, std::size_t index, std::uint64_t stream);

/// One task: sample the target, synthesize, simplify, check, score.
TaskRecord run_task(const CorpusEntry& entry, std::size_t index, const RunConfig& cfg);

/// Runs every entry (in parallel when cfg.jobs > 1); records keep corpus order.
/// Per-task errors are recorded, never thrown.
EvalReport evaluate_corpus(const std::vector<CorpusEntry>& corpus, const RunConfig& cfg);

struct CsvOptions {
  bool include_time = true;
  bool header = true;
  /// Extra (name, value) columns written before the per-task ones.
  std::vector<std::pair<std::string, std::string>> leading;
};

void write_csv(std::ostream& os, const EvalReport& report, const CsvOptions& opts = {});
void write_json_lines(std::ostream& os, const EvalReport& report, const CsvOptions& opts = {});
/// "# key: value" lines: tasks, success rate, equivalence range, means.
void write_summary(std::ostream& os, const EvalReport& report, std::string_view prefix = "# ");

}  // namespace ilsynth
