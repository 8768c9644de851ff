#include "ilsynth/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ilsynth/simplify.hpp"

namespace ilsynth {

std::string_view equiv_mode_name(EquivMode m) {
  return m == EquivMode::ExhaustiveReducedWidth ? "exhaustive" : "random";
}

std::string_view equiv_outcome_name(EquivOutcome e) {
  switch (e) {
    case EquivOutcome::NotChecked:
      return "none";
    case EquivOutcome::Counterexample:
      return "counterexample";
    case EquivOutcome::ExhaustiveReducedWidth:
      return "exhaustive";
    case EquivOutcome::RandomFullWidth:
      return "random";
  }
  return "?";
}

EquivVerdict EquivVerdict::counterexample(const Expr& a, const Expr& b, std::vector<Word> inputs) {
  if (evaluate(a, inputs) == evaluate(b, inputs))
    throw PreconditionError("counterexample inputs do not distinguish the expressions");
  EquivVerdict v;
  v.counterexample_ = std::move(inputs);
  return v;
}

EquivVerdict EquivVerdict::no_counterexample(std::uint64_t trials, EquivMode mode) {
  EquivVerdict v;
  v.trials_ = trials;
  v.mode_ = mode;
  return v;
}

unsigned reduced_width(unsigned arity, const EquivBudget& budget) {
  if (arity == 0) return budget.max_reduced_width;
  unsigned log2_points = 0;
  while ((std::uint64_t{1} << (log2_points + 1)) <= budget.exhaustive_points && log2_points < 63) ++log2_points;
  return std::max(1u, std::min(budget.max_reduced_width, log2_points / arity));
}

namespace {

constexpr std::size_t kChunk = 1 << 14;

/// Evaluates both expressions over a chunk of column-major points and returns
/// the index of the first disagreement.
std::optional<std::size_t> first_mismatch(const Expr& a, const Expr& b, const std::vector<std::vector<Word>>& cols,
                                          std::size_t n, unsigned width, BatchEvaluator& ev,
                                          std::vector<Word>& ra, std::vector<Word>& rb) {
  ra.resize(n);
  rb.resize(n);
  ev.run(a, cols, std::span<Word>(ra.data(), n), width);
  ev.run(b, cols, std::span<Word>(rb.data(), n), width);
  for (std::size_t i = 0; i < n; ++i)
    if (ra[i] != rb[i]) return i;
  return std::nullopt;
}

std::vector<Word> row_of(const std::vector<std::vector<Word>>& cols, std::size_t i) {
  std::vector<Word> row(cols.size());
  for (std::size_t v = 0; v < cols.size(); ++v) row[v] = cols[v][i];
  return row;
}

}  // namespace

EquivVerdict check_equiv(const Expr& a, const Expr& b, const EquivBudget& budget, unsigned arity) {
  if (arity == 0) arity = std::max(a.min_arity(), b.min_arity());
  if (a.min_arity() > arity || b.min_arity() > arity)
    throw PreconditionError("expressions use more inputs than the stated arity");

  BatchEvaluator ev;
  std::vector<Word> ra, rb;
  std::vector<std::vector<Word>> cols(arity, std::vector<Word>(kChunk));
  std::uint64_t trials = 0;

  // Phase 1: every input at a reduced width, last variable fastest.
  const unsigned w = reduced_width(arity, budget);
  const std::uint64_t points = arity == 0 ? 1 : std::uint64_t{1} << (w * arity);
  bool reduced_mismatch = false;
  if (points <= budget.exhaustive_points) {
    const Word digit_mask = width_mask(w);
    std::size_t confirmed_checks = 0;
    for (std::uint64_t base = 0; base < points; base += kChunk) {
      const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, points - base));
      for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t p = base + i;
        for (unsigned v = arity; v-- > 0;) {
          cols[v][i] = static_cast<Word>(p) & digit_mask;
          p >>= w;
        }
      }
      std::size_t offset = 0;
      while (offset < n) {
        auto sub_cols = cols;
        if (offset != 0)
          for (auto& c : sub_cols) c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(offset));
        const auto hit = first_mismatch(a, b, sub_cols, n - offset, w, ev, ra, rb);
        if (!hit) break;
        reduced_mismatch = true;
        auto row = row_of(sub_cols, *hit);
        if (evaluate(a, row) != evaluate(b, row)) return EquivVerdict::counterexample(a, b, std::move(row));
        // Reduced-width disagreement that vanishes at 32 bits: keep scanning a little.
        if (++confirmed_checks >= 64) break;
        offset += *hit + 1;
      }
      trials += n;
      if (confirmed_checks >= 64) break;
    }
  } else {
    reduced_mismatch = true;
  }

  // Phase 2: constant vectors, then random full-width inputs.
  static constexpr Word kConstants[] = {0u, 1u, 0xFFFFFFFFu, 0x80000000u, 0x7FFFFFFFu};
  for (Word c : kConstants) {
    std::vector<Word> row(arity, c);
    ++trials;
    if (evaluate(a, row) != evaluate(b, row)) return EquivVerdict::counterexample(a, b, std::move(row));
  }
  Rng rng(budget.seed);
  std::uniform_int_distribution<std::int32_t> small(-50, 49);
  std::uint64_t done = 0;
  while (done < budget.random_trials) {
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, budget.random_trials - done));
    for (std::size_t i = 0; i < n; ++i)
      for (unsigned v = 0; v < arity; ++v) {
        // Mostly uniform words, with small signed values mixed in.
        const std::uint64_t r = rng();
        cols[v][i] = (r & 3) == 0 ? static_cast<Word>(small(rng)) : static_cast<Word>(r >> 32);
      }
    const auto hit = first_mismatch(a, b, cols, n, kWordBits, ev, ra, rb);
    if (hit) return EquivVerdict::counterexample(a, b, row_of(cols, *hit));
    done += n;
    trials += n;
  }
  return EquivVerdict::no_counterexample(
      trials, reduced_mismatch ? EquivMode::RandomFullWidth : EquivMode::ExhaustiveReducedWidth);
}

std::optional<double> quality(const Expr& recovered, const Expr& target) {
  if (target.size() == 0) return std::nullopt;
  return static_cast<double>(recovered.size()) / static_cast<double>(target.size());
}

// ---------------------------------------------------------------------------
// SMT-LIB2

namespace {

std::string_view smt_op(Op op) {
  switch (op) {
    case Op::Neg:
      return "bvneg";
    case Op::Not:
      return "bvnot";
    case Op::Add:
      return "bvadd";
    case Op::Sub:
      return "bvsub";
    case Op::Mul:
      return "bvmul";
    case Op::Shl:
      return "bvshl";
    case Op::Lshr:
      return "bvlshr";
    case Op::Ashr:
      return "bvashr";
    case Op::And:
      return "bvand";
    case Op::Or:
      return "bvor";
    case Op::Xor:
      return "bvxor";
    case Op::Sdiv:
      return "bvsdiv";
    case Op::Udiv:
      return "bvudiv";
    case Op::Srem:
      return "bvsrem";
    case Op::Urem:
      return "bvurem";
    case Op::Concat:
      return "concat";
  }
  return "?";
}

std::string smt_const(Word w) { return "(_ bv" + std::to_string(w) + " 32)"; }

void smt_into(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case NodeKind::Var:
      out += "v" + std::to_string(e.var_index());
      return;
    case NodeKind::Const:
      out += smt_const(e.value());
      return;
    case NodeKind::Unary:
      out += "(" + std::string(smt_op(e.op())) + " ";
      smt_into(e.child(0), out);
      out += ")";
      return;
    case NodeKind::Binary:
      if (e.op() == Op::Concat) {
        // Low half-words of both operands, keeping 32 bits.
        out += "(concat ((_ extract 15 0) ";
        smt_into(e.child(0), out);
        out += ") ((_ extract 15 0) ";
        smt_into(e.child(1), out);
        out += "))";
        return;
      }
      out += "(" + std::string(smt_op(e.op())) + " ";
      smt_into(e.child(0), out);
      out += " ";
      smt_into(e.child(1), out);
      out += ")";
      return;
    case NodeKind::IteEqConst:
      out += "(ite (= ";
      smt_into(e.child(0), out);
      out += " " + smt_const(e.value()) + ") ";
      smt_into(e.child(1), out);
      out += " ";
      smt_into(e.child(2), out);
      out += ")";
      return;
  }
}

}  // namespace

std::string smt2_term(const Expr& e) {
  std::string out;
  smt_into(e, out);
  return out;
}

std::string export_smt2(const Expr& a, const Expr& b, unsigned arity) {
  if (arity == 0) arity = std::max(a.min_arity(), b.min_arity());
  std::ostringstream os;
  os << "; unsat iff the two expressions agree on every 32-bit input\n";
  os << "; lhs: " << print(a) << "\n";
  os << "; rhs: " << print(b) << "\n";
  os << "(set-logic QF_BV)\n";
  for (unsigned v = 0; v < arity; ++v) os << "(declare-fun v" << v << " () (_ BitVec 32))\n";
  os << "(assert (not (= " << smt2_term(a) << " " << smt2_term(b) << ")))\n";
  os << "(check-sat)\n";
  os << "(exit)\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Corpus evaluation

std::uint64_t task_seed(std::uint64_t seed, std::size_t index, std::uint64_t stream) {
  // splitmix64 finaliser over (seed, index, stream)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) * 4 + stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

TaskRecord run_task(const CorpusEntry& entry, std::size_t index, const RunConfig& cfg) {
  TaskRecord rec;
  rec.id = entry.id.empty() ? std::to_string(index) : entry.id;
  try {
    if (entry.arity != 0 && entry.target.min_arity() > entry.arity)
      throw MalformedExpr("target uses v" + std::to_string(entry.target.min_arity() - 1) + " but the task has " +
                          std::to_string(entry.arity) + " inputs");
    const unsigned arity = std::max(entry.arity, entry.target.min_arity());
    SamplingStrategy strategy = cfg.sampling;
    strategy.seed = task_seed(cfg.seed, index, 0);
    if (cfg.heuristic == Heuristic::MCTS && cfg.mcts.n_samples >= strategy.constant_vectors.size())
      strategy.n_random = cfg.mcts.n_samples - strategy.constant_vectors.size();
    const SampleSet samples = sample_expr(entry.target, arity, strategy);

    SearchResult result;
    if (cfg.heuristic == Heuristic::MCTS) {
      MctsConfig mc = cfg.mcts;
      mc.seed = task_seed(cfg.seed, index, 1);
      result = mcts_synthesize(samples, mc);
    } else {
      SearchConfig sc = cfg.search;
      sc.heuristic = cfg.heuristic;
      sc.seed = task_seed(cfg.seed, index, 1);
      result = synthesize(samples, sc);
    }
    rec.status = result.status;
    rec.distance = result.final_distance;
    rec.time = result.wall_time;
    rec.iterations = result.iterations;
    if (!result.expr.empty()) {
      const Expr found = cfg.simplify_results ? simplify(result.expr) : result.expr;
      rec.expr = print(found);
      rec.size = found.size();
      if (result.status == SearchStatus::Exact) {
        const EquivVerdict v = check_equiv(found, entry.target, cfg.equiv, arity);
        rec.equiv = v.has_counterexample() ? EquivOutcome::Counterexample
                    : v.mode() == EquivMode::ExhaustiveReducedWidth ? EquivOutcome::ExhaustiveReducedWidth
                                                                    : EquivOutcome::RandomFullWidth;
        rec.quality = quality(found, entry.target);
      }
    }
  } catch (const std::exception& e) {
    rec.status = SearchStatus::Failure;
    rec.error = e.what();
  }
  return rec;
}

void EvalReport::aggregate() {
  tasks = records.size();
  success_rate = equiv_lower = equiv_upper = 0.0;
  mean_quality.reset();
  mean_time.reset();
  if (tasks == 0) return;
  std::size_t ok = 0, lower = 0, upper = 0, nq = 0;
  double sum_q = 0.0, sum_t = 0.0;
  for (const auto& r : records) {
    if (r.status == SearchStatus::Exact) ++ok;
    if (r.equiv == EquivOutcome::ExhaustiveReducedWidth) ++lower;
    if (r.equiv == EquivOutcome::ExhaustiveReducedWidth || r.equiv == EquivOutcome::RandomFullWidth) ++upper;
    if (r.status == SearchStatus::Exact && r.quality) {
      sum_q += *r.quality;
      ++nq;
    }
    sum_t += r.time;
  }
  const double n = static_cast<double>(tasks);
  success_rate = static_cast<double>(ok) / n;
  equiv_lower = static_cast<double>(lower) / n;
  equiv_upper = static_cast<double>(upper) / n;
  if (nq > 0) mean_quality = sum_q / static_cast<double>(nq);
  mean_time = sum_t / n;
}

EvalReport evaluate_corpus(const std::vector<CorpusEntry>& corpus, const RunConfig& cfg) {
  EvalReport report;
  report.records.resize(corpus.size());
  const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(corpus.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < corpus.size(); i = next++) report.records[i] = run_task(corpus[i], i, cfg);
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  report.aggregate();
  return report;
}

namespace {

std::string fmt_double(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_csv(std::ostream& os, const EvalReport& report, const CsvOptions& opts) {
  if (opts.header) {
    for (const auto& [name, value] : opts.leading) os << csv_field(name) << ',';
    os << "id,status,distance,equiv,quality,time,iterations,size,expr,error\n";
  }
  for (const auto& r : report.records) {
    for (const auto& [name, value] : opts.leading) os << csv_field(value) << ',';
    os << csv_field(r.id) << ',' << status_name(r.status) << ',' << fmt_double(r.distance, 10) << ','
       << equiv_outcome_name(r.equiv) << ',' << (r.quality ? fmt_double(*r.quality) : "") << ','
       << (opts.include_time ? fmt_double(r.time, 4) : "") << ',' << r.iterations << ',' << r.size << ','
       << csv_field(r.expr) << ',' << csv_field(r.error) << '\n';
  }
}

void write_json_lines(std::ostream& os, const EvalReport& report, const CsvOptions& opts) {
  for (const auto& r : report.records) {
    nlohmann::ordered_json j;
    for (const auto& [name, value] : opts.leading) j[name] = value;
    j["id"] = r.id;
    j["status"] = status_name(r.status);
    j["distance"] = r.distance;
    j["equiv"] = equiv_outcome_name(r.equiv);
    j["quality"] = r.quality ? nlohmann::ordered_json(*r.quality) : nlohmann::ordered_json(nullptr);
    if (opts.include_time) j["time"] = r.time;
    j["iterations"] = r.iterations;
    j["size"] = r.size;
    j["expr"] = r.expr;
    if (!r.error.empty()) j["error"] = r.error;
    os << j.dump() << '\n';
  }
}

void write_summary(std::ostream& os, const EvalReport& report, std::string_view prefix) {
  auto pct = [](double v) { return fmt_double(100.0 * v, 4) + "%"; };
  os << prefix << "tasks: " << report.tasks << '\n';
  os << prefix << "success_rate: " << pct(report.success_rate) << '\n';
  os << prefix << "equiv_range: " << pct(report.equiv_lower) << " - " << pct(report.equiv_upper)
     << " (lower: exhaustive reduced-width + random full-width, no SMT proof)\n";
  os << prefix << "mean_quality: " << (report.mean_quality ? fmt_double(*report.mean_quality, 4) : "undefined")
     << '\n';
  os << prefix << "mean_time: " << (report.mean_time ? fmt_double(*report.mean_time, 4) : "undefined") << '\n';
}

}  // namespace ilsynth
