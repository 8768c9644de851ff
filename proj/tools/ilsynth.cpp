// ilsynth: blackbox expression synthesis from input/output samples.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ilsynth/benchgen.hpp"
#include "ilsynth/mcts.hpp"
#include "ilsynth/metrics.hpp"
#include "ilsynth/search.hpp"
#include "ilsynth/simplify.hpp"

namespace fs = std::filesystem;
using namespace ilsynth;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kNotExact = 1, kUsage = 2, kRuntime = 3 };

struct IoError : Error {
  using Error::Error;
};

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Expr read_expr(const std::string& path) {
  auto exprs = parse_lines(slurp(path));
  if (exprs.empty()) throw IoError(path + " holds no expression");
  return exprs.front();
}

std::vector<Word> parse_words(const std::string& text) {
  std::vector<Word> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(parse(item).value());
  }
  return out;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

struct OutFile {
  explicit OutFile(const std::string& path) {
    if (!path.empty() && path != "-") {
      file.open(path);
      if (!file) throw IoError("cannot write " + path);
    }
  }
  std::ostream& get() { return file.is_open() ? static_cast<std::ostream&>(file) : std::cout; }
  std::ofstream file;
};

// Options shared by synth and bench-run.
struct GrammarOpts {
  std::string ops = "expr";
  std::string objective = "logarith";
  std::string constants;
  unsigned const_range = 0;
  std::size_t stall_limit = 100;
  std::uint64_t max_iter = 0;
  double sa_uct = 1.5;
  std::size_t playout_depth = 0;
  std::size_t n_samples = 50;
  std::size_t n_random = 95;
  std::string branch_aware;
  unsigned cond_var = 2;

  void add_to(CLI::App* app) {
    app->add_option("--ops", ops, "Operator set: full, expr, mba, mba-ite")->capture_default_str();
    app->add_option("--objective", objective, "logarith, arith, hamming or xor")->capture_default_str();
    app->add_option("--constants", constants, "Comma-separated grammar constants (default 1)");
    app->add_option("--const-range", const_range, "Grammar constants 1..N");
    app->add_option("--stall-limit", stall_limit, "Inconclusive mutations before a climb ends")->capture_default_str();
    app->add_option("--max-iter", max_iter, "Candidate evaluations per task (0 = time only)")->capture_default_str();
    app->add_option("--sa-uct", sa_uct, "MCTS exploration constant")->capture_default_str();
    app->add_option("--playout-depth", playout_depth, "MCTS random derivation steps")->capture_default_str();
    app->add_option("--n-samples", n_samples, "MCTS sample count")->capture_default_str();
    app->add_option("--n-random", n_random, "Random samples (constant vectors are added)")->capture_default_str();
    app->add_option("--branch-aware", branch_aware, "Condition constants for branch-aware sampling, e.g. 0,1");
    app->add_option("--cond-var", cond_var, "Input index of the branch condition")->capture_default_str();
  }

  OperatorSet grammar() const {
    OperatorSet g = OperatorSet::by_name(ops);
    if (const_range > 0) g = g.with_constant_range(const_range);
    if (!constants.empty()) g = g.with_constants(parse_words(constants));
    return g;
  }

  SamplingStrategy sampling() const {
    SamplingStrategy s;
    s.n_random = n_random;
    if (!branch_aware.empty()) s.branch_aware = BranchAware{cond_var, parse_words(branch_aware)};
    return s;
  }

  RunConfig run_config(Heuristic h, double timeout, std::uint64_t seed) const {
    RunConfig cfg;
    cfg.heuristic = h;
    cfg.seed = seed;
    cfg.sampling = sampling();
    cfg.search.operator_set = grammar();
    cfg.search.objective = objective_from_name(objective);
    cfg.search.timeout = timeout;
    cfg.search.stall_limit = stall_limit;
    cfg.search.max_iterations = max_iter;
    cfg.mcts.operator_set = cfg.search.operator_set;
    cfg.mcts.objective = cfg.search.objective;
    cfg.mcts.timeout = timeout;
    cfg.mcts.sa_uct = sa_uct;
    cfg.mcts.max_playout_depth = playout_depth;
    cfg.mcts.n_samples = n_samples;
    cfg.mcts.max_iterations = max_iter;
    return cfg;
  }
};

struct Globals {
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string format = "csv";
};

// ---------------------------------------------------------------------------

struct SynthCmd {
  GrammarOpts g;
  std::string heuristic = "ils";
  double timeout = 60.0;
  std::string target;
  std::string oracle_cmd;
  unsigned arity = 0;
  std::string trace;
  bool require_exact = false;
  bool no_simplify = false;

  int run(const Globals& glob) {
    const Heuristic h = heuristic_from_name(heuristic);
    RunConfig cfg = g.run_config(h, timeout, glob.seed);
    SamplingStrategy strategy = cfg.sampling;
    strategy.seed = task_seed(glob.seed, 0, 0);
    if (h == Heuristic::MCTS && cfg.mcts.n_samples >= strategy.constant_vectors.size())
      strategy.n_random = cfg.mcts.n_samples - strategy.constant_vectors.size();

    std::optional<SampleSet> samples;
    if (!target.empty()) {
      const Expr t = read_expr(target);
      samples.emplace(sample_expr(t, std::max(arity, t.min_arity()), strategy));
    } else {
      if (arity == 0) throw PreconditionError("--oracle-cmd needs --arity");
      samples.emplace(sample_external(oracle_cmd, arity, strategy));
    }

    SearchResult r;
    if (h == Heuristic::MCTS) {
      cfg.mcts.seed = task_seed(glob.seed, 0, 1);
      r = mcts_synthesize(*samples, cfg.mcts);
    } else {
      cfg.search.heuristic = h;
      cfg.search.seed = task_seed(glob.seed, 0, 1);
      r = synthesize(*samples, cfg.search);
    }
    Expr found = r.expr;
    if (!found.empty() && !no_simplify) found = simplify(found);

    std::cout << (found.empty() ? "" : print(found)) << '\n';
    if (glob.format == "json-lines") {
      nlohmann::ordered_json j;
      j["status"] = status_name(r.status);
      j["distance"] = r.final_distance;
      j["time"] = r.wall_time;
      j["iterations"] = r.iterations;
      j["size"] = found.empty() ? 0 : found.size();
      j["samples"] = samples->size();
      j["seed"] = glob.seed;
      std::cout << j.dump() << '\n';
    } else {
      std::cout << "status,distance,time,iterations,size,samples,seed\n"
                << status_name(r.status) << ',' << r.final_distance << ',' << r.wall_time << ',' << r.iterations
                << ',' << (found.empty() ? 0 : found.size()) << ',' << samples->size() << ',' << glob.seed << '\n';
    }
    if (!trace.empty()) {
      OutFile out(trace);
      out.get() << "time,distance\n";
      for (const auto& p : r.distance_trace) out.get() << p.time << ',' << p.distance << '\n';
    }
    if (require_exact && r.status != SearchStatus::Exact) return kNotExact;
    return kOk;
  }
};

struct SimplifyCmd {
  std::string input;
  std::string output;

  int run() {
    const auto exprs = parse_lines(slurp(input));
    OutFile out(output);
    std::size_t before = 0, after = 0;
    for (const auto& e : exprs) {
      const Expr s = simplify(e);
      out.get() << print(s) << '\n';
      std::cerr << "size " << e.size() << " -> " << s.size() << '\n';
      before += e.size();
      after += s.size();
    }
    std::cerr << "total size " << before << " -> " << after << " over " << exprs.size() << " expressions\n";
    return kOk;
  }
};

struct CheckEquivCmd {
  std::string a, b;
  std::string smt2;
  std::uint64_t trials = 1'000'000;
  unsigned arity = 0;

  int run(const Globals& glob) {
    const Expr ea = read_expr(a), eb = read_expr(b);
    EquivBudget budget;
    budget.random_trials = trials;
    budget.seed = glob.seed ^ budget.seed;
    const EquivVerdict v = check_equiv(ea, eb, budget, arity);
    if (v.has_counterexample()) {
      std::cout << "counterexample";
      for (std::size_t i = 0; i < v.inputs().size(); ++i)
        std::cout << " v" << i << '=' << static_cast<std::int32_t>(v.inputs()[i]);
      std::cout << '\n';
    } else {
      std::cout << "no-counterexample mode=" << equiv_mode_name(v.mode()) << " trials=" << v.trials() << '\n';
    }
    if (!smt2.empty()) {
      OutFile out(smt2);
      out.get() << export_smt2(ea, eb, arity);
    }
    return kOk;
  }
};

struct GenBenchCmd {
  std::string spec_file;
  std::string out_dir;

  int run(const Globals& glob, bool seed_given) {
    BenchSpec spec = spec_file.empty() ? BenchSpec{} : BenchSpec::from_json(slurp(spec_file));
    if (seed_given || spec_file.empty()) spec.seed = glob.seed;
    const auto entries = gen_bench(spec);
    write_corpus(out_dir, entries, spec);
    std::cerr << "wrote " << entries.size() << " expressions to " << out_dir << '\n';
    return kOk;
  }
};

void write_entries(const std::string& out_dir, const std::vector<std::pair<std::string, Expr>>& items,
                   const std::string& category) {
  if (out_dir.empty()) {
    for (const auto& [id, e] : items) std::cout << "# " << id << '\n' << print(e) << '\n';
    return;
  }
  fs::create_directories(out_dir);
  std::ofstream corpus(fs::path(out_dir) / "corpus.expr");
  if (!corpus) throw IoError("cannot write " + out_dir);
  nlohmann::ordered_json m;
  m["entries"] = nlohmann::ordered_json::array();
  for (const auto& [id, e] : items) {
    corpus << print(e) << '\n';
    m["entries"].push_back({{"id", id}, {"category", category}, {"arity", e.min_arity()}, {"height", e.height()}});
  }
  std::ofstream(fs::path(out_dir) / "manifest.json") << m.dump(2) << '\n';
}

struct ProtectEncodeCmd {
  std::string profile = "bp1";
  std::string input;
  std::size_t decoys = 2;
  std::string combiner = "add";
  std::string out_dir;

  int run(const Globals& glob) {
    const Profile p = profile_from_name(profile);
    std::vector<std::pair<std::string, Expr>> items;
    if (input.empty()) {
      for (const auto& h : protected_handlers(p, glob.seed))
        for (std::size_t i = 0; i < h.encoding.parts.size(); ++i)
          items.emplace_back(h.name + "/h" + std::to_string(i), h.encoding.parts[i]);
    } else {
      if (combiner != "add" && combiner != "xor") throw PreconditionError("combiner must be add or xor");
      const Combiner c = combiner == "add" ? Combiner::AddFold : Combiner::XorFold;
      Rng rng(glob.seed);
      const auto exprs = parse_lines(slurp(input));
      for (std::size_t k = 0; k < exprs.size(); ++k) {
        const auto enc = encode_random(exprs[k], decoys, p, c, rng);
        for (std::size_t i = 0; i < enc.parts.size(); ++i)
          items.emplace_back(std::to_string(k) + "/h" + std::to_string(i), enc.parts[i]);
      }
    }
    write_entries(out_dir, items, std::string(profile_name(p)));
    return kOk;
  }
};

struct ProtectMergeCmd {
  unsigned depth = 1;
  std::string input;
  unsigned cond_var = 2;
  bool branchless = false;
  std::string out_dir;

  int run() {
    std::vector<std::pair<std::string, Expr>> items;
    if (input.empty()) {
      const auto ds = merged_dataset(depth);
      for (std::size_t i = 0; i < ds.size(); ++i) {
        Expr e = ds[i];
        if (branchless) {
          // Rebuild from the handlers to lower every ITE.
          std::vector<Expr> hs;
          Expr cur = e;
          while (cur.kind() == NodeKind::IteEqConst) {
            hs.push_back(cur.child(1));
            cur = cur.child(2);
          }
          hs.push_back(cur);
          e = gen_merged(hs, 2).branchless;
        }
        items.emplace_back("d" + std::to_string(depth) + "/" + std::to_string(i), e);
      }
    } else {
      const auto merged = gen_merged(parse_lines(slurp(input)), cond_var);
      items.emplace_back("merged", branchless ? merged.branchless : merged.with_ite);
    }
    write_entries(out_dir, items, "merged");
    return kOk;
  }
};

struct BenchRunCmd {
  GrammarOpts g;
  std::string corpus;
  std::vector<std::string> heuristics;
  std::vector<double> timeouts;
  bool no_timing = false;
  std::string smt2_dir;
  std::string output;

  int run(const Globals& glob, const std::vector<std::string>& argv) {
    const auto entries = read_corpus(corpus);
    if (heuristics.empty()) heuristics.push_back("ils");
    if (timeouts.empty()) timeouts.push_back(60.0);
    if (timeouts.size() != 1 && timeouts.size() != heuristics.size())
      throw PreconditionError("give one --timeout, or one per --heuristic");

    OutFile out(output);
    std::ostream& os = out.get();
    // Manifest as comment lines; the body below it is seed-determined.
    os << "# tool: ilsynth " << kVersion << '\n';
    os << "# subcommand: bench-run\n";
    os << "# argv:";
    for (const auto& a : argv) os << ' ' << a;
    os << '\n';
    os << "# seed: " << glob.seed << '\n';
    os << "# jobs: " << glob.jobs << '\n';
    os << "# corpus: " << corpus << " (" << entries.size() << " tasks)\n";
    os << "# started: " << utc_now() << '\n';

    const CsvOptions base{!no_timing, true, {}};
    for (std::size_t k = 0; k < heuristics.size(); ++k) {
      const Heuristic h = heuristic_from_name(heuristics[k]);
      const double t = timeouts.size() == 1 ? timeouts[0] : timeouts[k];
      RunConfig cfg = g.run_config(h, t, glob.seed);
      cfg.jobs = glob.jobs;
      const EvalReport report = evaluate_corpus(entries, cfg);

      std::ostringstream ts;
      ts << t;
      CsvOptions opts = base;
      opts.header = k == 0;
      opts.leading = {{"heuristic", std::string(heuristic_name(h))}, {"timeout", ts.str()}};
      if (glob.format == "json-lines")
        write_json_lines(os, report, opts);
      else
        write_csv(os, report, opts);
      write_summary(os, report, "# " + std::string(heuristic_name(h)) + "@" + ts.str() + "s ");

      if (!smt2_dir.empty()) {
        fs::create_directories(smt2_dir);
        for (std::size_t i = 0; i < report.records.size(); ++i) {
          const auto& r = report.records[i];
          if (r.expr.empty()) continue;
          const fs::path file = fs::path(smt2_dir) / (std::string(heuristic_name(h)) + "_" + ts.str() + "_" +
                                                      std::to_string(i) + ".smt2");
          std::ofstream f(file);
          if (!f) throw IoError("cannot write " + file.string());
          f << export_smt2(parse(r.expr), entries[i].target, entries[i].arity);
        }
      }
    }
    os << "# finished: " << utc_now() << '\n';
    return kOk;
  }
};

struct ServeCmd {
  std::string target;
  unsigned arity = 0;

  int run() {
    const Expr e = read_expr(target);
    const unsigned n = std::max(arity, e.min_arity());
    std::string line;
    std::vector<Word> in;
    while (std::getline(std::cin, line)) {
      std::istringstream ss(line);
      in.clear();
      long long v;
      while (ss >> v) in.push_back(static_cast<Word>(v));
      if (in.size() != n) throw ProtocolError("expected " + std::to_string(n) + " inputs, got: " + line);
      std::cout << static_cast<std::int32_t>(evaluate(e, in)) << std::endl;
    }
    return kOk;
  }
};

std::string error_prefix(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return "io";
  if (dynamic_cast<const ParseError*>(&e)) return "parse";
  if (dynamic_cast<const ProtocolError*>(&e)) return "protocol";
  if (dynamic_cast<const SamplingError*>(&e)) return "sampling";
  if (dynamic_cast<const MalformedExpr*>(&e)) return "malformed";
  if (dynamic_cast<const GenerationError*>(&e)) return "generation";
  if (dynamic_cast<const PreconditionError*>(&e)) return "config";
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return "io";
  return "internal";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blackbox expression synthesis from input/output samples"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Globals glob;
  auto* seed_opt = app.add_option("--seed", glob.seed, "Seed for every stochastic step")->capture_default_str();
  app.add_option("--jobs", glob.jobs, "Tasks run concurrently")->capture_default_str();
  app.add_option("--format", glob.format, "Record format")
      ->check(CLI::IsMember({"csv", "json-lines"}))
      ->capture_default_str();

  SynthCmd synth;
  auto* s = app.add_subcommand("synth", "Synthesize an expression from samples");
  synth.g.add_to(s);
  s->add_option("--heuristic", synth.heuristic, "ils, hillclimb, randomwalk, simanneal, metropolis, mcts")
      ->capture_default_str();
  s->add_option("--timeout", synth.timeout, "Seconds")->capture_default_str();
  auto* tgt = s->add_option("--target-expr", synth.target, "File holding the target expression");
  auto* orc = s->add_option("--oracle-cmd", synth.oracle_cmd, "Blackbox command speaking the line protocol");
  tgt->excludes(orc);
  s->add_option("--arity", synth.arity, "Input count");
  s->add_option("--trace", synth.trace, "Write the distance trace as CSV");
  s->add_flag("--require-exact", synth.require_exact, "Exit 1 unless the result is exact");
  s->add_flag("--no-simplify", synth.no_simplify, "Print the raw search result");

  SimplifyCmd simp;
  auto* sp = app.add_subcommand("simplify", "Rewrite expressions to a fixpoint");
  sp->add_option("file", simp.input, "Expression file ('-' for stdin)")->required();
  sp->add_option("-o,--output", simp.output, "Output file");

  CheckEquivCmd eq;
  auto* ce = app.add_subcommand("check-equiv", "Look for an input distinguishing two expressions");
  ce->add_option("a", eq.a)->required();
  ce->add_option("b", eq.b)->required();
  ce->add_option("--emit-smt2", eq.smt2, "Write an SMT-LIB2 query (unsat iff equivalent)");
  ce->add_option("--trials", eq.trials, "Random full-width trials")->capture_default_str();
  ce->add_option("--arity", eq.arity, "Input count");

  GenBenchCmd gb;
  auto* gbc = app.add_subcommand("gen-bench", "Generate a random benchmark corpus");
  gbc->add_option("--spec", gb.spec_file, "JSON spec (default: 370/370/370, arities 150/600/180/90/90)");
  gbc->add_option("-o,--output", gb.out_dir, "Corpus directory")->required();

  auto* prot = app.add_subcommand("protect", "Build protected handlers");
  prot->require_subcommand(1);
  ProtectEncodeCmd enc;
  auto* pe = prot->add_subcommand("encode", "Split handlers into semantically complex parts");
  pe->add_option("--profile", enc.profile, "bp1, bp2 or bp3")->capture_default_str();
  pe->add_option("--input", enc.input, "Handlers to encode with random decoys (default: the profile table)");
  pe->add_option("--decoys", enc.decoys, "Decoy count per handler")->capture_default_str();
  pe->add_option("--combiner", enc.combiner, "add or xor")->capture_default_str();
  pe->add_option("-o,--output", enc.out_dir, "Corpus directory");
  ProtectMergeCmd mer;
  auto* pm = prot->add_subcommand("merge", "Merge handlers behind equality conditions");
  pm->add_option("--depth", mer.depth, "Dataset nesting depth 1..5")->capture_default_str();
  pm->add_option("--input", mer.input, "Handlers to merge into one expression");
  pm->add_option("--cond-var", mer.cond_var, "Condition input index")->capture_default_str();
  pm->add_flag("--branchless", mer.branchless, "Lower conditions to arithmetic masks");
  pm->add_option("-o,--output", mer.out_dir, "Corpus directory");

  BenchRunCmd br;
  auto* brc = app.add_subcommand("bench-run", "Evaluate heuristics over a corpus");
  br.g.add_to(brc);
  brc->add_option("--corpus", br.corpus, "Corpus directory or expression file")->required();
  brc->add_option("--heuristic", br.heuristics, "Repeatable");
  brc->add_option("--timeout", br.timeouts, "Repeatable, paired with --heuristic");
  brc->add_flag("--no-timing", br.no_timing, "Leave the time column empty");
  brc->add_option("--emit-smt2", br.smt2_dir, "Directory for one SMT-LIB2 query per task");
  brc->add_option("-o,--output", br.output, "Report file (default stdout)");

  ServeCmd serve;
  auto* sv = app.add_subcommand("serve-expr", "Answer line-protocol queries by evaluating an expression");
  sv->add_option("file", serve.target)->required();
  sv->add_option("--arity", serve.arity, "Input count");

  for (auto* sub : {s, sp, ce, gbc, prot, pe, pm, brc, sv}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*s) {
      if (synth.target.empty() && synth.oracle_cmd.empty()) {
        std::cerr << "error: usage: synth needs --target-expr or --oracle-cmd\n";
        return kUsage;
      }
      return synth.run(glob);
    }
    if (*sp) return simp.run();
    if (*ce) return eq.run(glob);
    if (*gbc) return gb.run(glob, seed_opt->count() > 0);
    if (*pe) return enc.run(glob);
    if (*pm) return mer.run();
    if (*brc) return br.run(glob, std::vector<std::string>(argv + 1, argv + argc));
    if (*sv) return serve.run();
  } catch (const std::exception& e) {
    std::cerr << "error: " << error_prefix(e) << ": " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
