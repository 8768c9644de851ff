#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ilsynth/benchgen.hpp"
#include "ilsynth/mcts.hpp"
#include "ilsynth/metrics.hpp"
#include "ilsynth/search.hpp"
#include "ilsynth/simplify.hpp"

namespace py = pybind11;
using namespace ilsynth;

namespace {

SamplingStrategy strategy(std::size_t n_random, std::uint64_t seed) {
  SamplingStrategy s;
  s.n_random = n_random;
  s.seed = seed;
  return s;
}

py::dict result_dict(const SearchResult& r) {
  py::dict d;
  d["status"] = std::string(status_name(r.status));
  d["expr"] = r.expr.empty() ? std::string() : print(r.expr);
  d["distance"] = r.final_distance;
  d["iterations"] = r.iterations;
  d["time"] = r.wall_time;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ilsynth, m) {
  m.doc() = "Blackbox expression synthesis from input/output samples";

  py::register_exception<ParseError>(m, "ParseError");
  py::register_exception<MalformedExpr>(m, "MalformedExpr");
  py::register_exception<PreconditionError>(m, "PreconditionError");
  py::register_exception<SamplingError>(m, "SamplingError");
  py::register_exception<GenerationError>(m, "GenerationError");

  py::class_<Expr>(m, "Expr")
      .def_static("parse", &parse, py::arg("text"))
      .def("__str__", [](const Expr& e) { return print(e); })
      .def("__repr__", [](const Expr& e) { return "Expr(" + print(e) + ")"; })
      .def("__eq__", [](const Expr& a, const Expr& b) { return a == b; })
      .def("__hash__", &Expr::hash)
      .def_property_readonly("size", &Expr::size)
      .def_property_readonly("height", &Expr::height)
      .def_property_readonly("arity", &Expr::min_arity)
      .def("evaluate", [](const Expr& e, const std::vector<Word>& in) { return evaluate(e, in); }, py::arg("inputs"));

  m.def("parse", &parse, py::arg("text"));
  m.def("simplify", &simplify, py::arg("expr"));
  m.def("mba_encode", &mba_encode, py::arg("expr"), py::arg("rounds") = 1);
  m.def("export_smt2", &export_smt2, py::arg("a"), py::arg("b"), py::arg("arity") = 0);

  m.def(
      "check_equiv",
      [](const Expr& a, const Expr& b, std::uint64_t trials) {
        EquivBudget budget;
        budget.random_trials = trials;
        const EquivVerdict v = check_equiv(a, b, budget);
        py::dict d;
        d["equivalent"] = !v.has_counterexample();
        if (v.has_counterexample()) {
          d["counterexample"] = v.inputs();
        } else {
          d["mode"] = std::string(equiv_mode_name(v.mode()));
          d["trials"] = v.trials();
        }
        return d;
      },
      py::arg("a"), py::arg("b"), py::arg("trials") = 1'000'000);

  m.def(
      "distance",
      [](const Expr& candidate, const Expr& target, const std::string& objective, std::uint64_t seed) {
        const SampleSet s = sample_expr(target, std::max(candidate.min_arity(), target.min_arity()),
                                        strategy(95, seed));
        return distance(objective_from_name(objective), candidate, s);
      },
      py::arg("candidate"), py::arg("target"), py::arg("objective") = "logarith", py::arg("seed") = 0);

  m.def(
      "synthesize",
      [](const Expr& target, unsigned arity, const std::string& heuristic, const std::string& ops, double timeout,
         std::uint64_t seed, std::uint64_t max_iterations) {
        const Heuristic h = heuristic_from_name(heuristic);
        const unsigned n = std::max(arity, target.min_arity());
        SearchResult r;
        py::gil_scoped_release release;
        if (h == Heuristic::MCTS) {
          MctsConfig cfg;
          cfg.operator_set = OperatorSet::by_name(ops);
          cfg.timeout = timeout;
          cfg.seed = seed;
          if (max_iterations) cfg.max_iterations = max_iterations;
          r = mcts_synthesize(sample_expr(target, n, strategy(cfg.n_samples - 5, seed)), cfg);
        } else {
          SearchConfig cfg;
          cfg.heuristic = h;
          cfg.operator_set = OperatorSet::by_name(ops);
          cfg.timeout = timeout;
          cfg.seed = seed;
          cfg.max_iterations = max_iterations;
          r = synthesize(sample_expr(target, n, strategy(95, seed)), cfg);
        }
        py::gil_scoped_acquire acquire;
        return result_dict(r);
      },
      py::arg("target"), py::arg("arity") = 0, py::arg("heuristic") = "ils", py::arg("ops") = "expr",
      py::arg("timeout") = 60.0, py::arg("seed") = 0, py::arg("max_iterations") = 0);

  m.def(
      "gen_bench",
      [](const std::string& spec_json, std::uint64_t seed) {
        BenchSpec spec = spec_json.empty() ? BenchSpec{} : BenchSpec::from_json(spec_json);
        spec.seed = seed;
        std::vector<std::tuple<std::string, Expr, unsigned>> out;
        for (auto& e : gen_bench(spec)) out.emplace_back(std::string(category_name(e.category)), e.expr, e.arity);
        return out;
      },
      py::arg("spec_json") = "", py::arg("seed") = 0);

  m.def("canonicalize", [](const Expr& e) { return canonicalize(e); }, py::arg("expr"));
  m.def("merged_dataset", &merged_dataset, py::arg("nesting"));
  m.def(
      "gen_merged",
      [](const std::vector<Expr>& handlers, unsigned cond_var) {
        auto mh = gen_merged(handlers, cond_var);
        return std::make_pair(mh.with_ite, mh.branchless);
      },
      py::arg("handlers"), py::arg("cond_var") = 2);
  m.def(
      "protected_handlers",
      [](const std::string& profile, std::uint64_t seed) {
        std::vector<std::tuple<std::string, Expr, std::vector<Expr>, std::string>> out;
        for (auto& h : protected_handlers(profile_from_name(profile), seed))
          out.emplace_back(h.name, h.encoding.original, h.encoding.parts,
                           std::string(combiner_name(h.encoding.combiner)));
        return out;
      },
      py::arg("profile"), py::arg("seed") = 0);
}
