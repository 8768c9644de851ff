#include "ilsynth/search.hpp"

#include "ilsynth/mcts.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace ilsynth {

Heuristic heuristic_from_name(std::string_view name) {
  if (name == "ils") return Heuristic::ILS;
  if (name == "hc" || name == "hillclimb") return Heuristic::HillClimb;
  if (name == "rw" || name == "randomwalk") return Heuristic::RandomWalk;
  if (name == "sa" || name == "simanneal") return Heuristic::SimAnneal;
  if (name == "mh" || name == "metropolis") return Heuristic::MetropolisHastings;
  if (name == "mcts") return Heuristic::MCTS;
  throw PreconditionError("unknown heuristic '" + std::string(name) + "'");
}

std::string_view heuristic_name(Heuristic h) {
  switch (h) {
    case Heuristic::ILS:
      return "ils";
    case Heuristic::HillClimb:
      return "hillclimb";
    case Heuristic::RandomWalk:
      return "randomwalk";
    case Heuristic::SimAnneal:
      return "simanneal";
    case Heuristic::MetropolisHastings:
      return "metropolis";
    case Heuristic::MCTS:
      return "mcts";
  }
  return "?";
}

std::string_view status_name(SearchStatus s) {
  switch (s) {
    case SearchStatus::Exact:
      return "exact";
    case SearchStatus::Best:
      return "best";
    case SearchStatus::Failure:
      return "failure";
  }
  return "?";
}

void SearchConfig::validate() const {
  if (!(timeout > 0.0)) throw PreconditionError("timeout must be positive");
  if (stall_limit < 1) throw PreconditionError("stall limit must be at least 1");
  if (operator_set.operators.empty() && !operator_set.ite_enabled)
    throw PreconditionError("operator set is empty");
  if (leaf_probability < 0.0 || leaf_probability > 1.0)
    throw PreconditionError("leaf probability must be in [0, 1]");
}

// ---------------------------------------------------------------------------
// Neighbourhood moves

Expr random_terminal(unsigned arity, const OperatorSet& grammar, Rng& rng) {
  const std::size_t n = arity + grammar.constants.size();
  if (n == 0) throw PreconditionError("grammar has no terminals");
  const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  if (pick < arity) return Expr::var(static_cast<unsigned>(pick));
  return Expr::constant(grammar.constants[pick - arity]);
}

Expr random_depth_one(unsigned arity, const OperatorSet& grammar, Rng& rng) {
  const std::size_t n = grammar.operators.size() + (grammar.ite_enabled ? 1 : 0);
  if (n == 0) throw PreconditionError("operator set is empty");
  const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  if (pick == grammar.operators.size()) {
    Expr s = random_terminal(arity, grammar, rng);
    Expr t = random_terminal(arity, grammar, rng);
    Expr f = random_terminal(arity, grammar, rng);
    return Expr::ite_eq(std::move(s), 0, std::move(t), std::move(f));
  }
  const Op op = grammar.operators[pick];
  if (info(op).arity == 1) return Expr::unary(op, random_terminal(arity, grammar, rng));
  Expr a = random_terminal(arity, grammar, rng);
  Expr b = random_terminal(arity, grammar, rng);
  return Expr::binary(op, std::move(a), std::move(b));
}

Expr mutate(const Expr& e, const OperatorSet& grammar, unsigned arity, Rng& rng, double leaf_probability) {
  const std::size_t pos = std::uniform_int_distribution<std::size_t>(0, e.node_count() - 1)(rng);
  const bool leaf = std::bernoulli_distribution(leaf_probability)(rng);
  Expr replacement = leaf ? random_terminal(arity, grammar, rng) : random_depth_one(arity, grammar, rng);
  return e.replace_at(pos, replacement);
}

Expr perturb(const Expr& e, const OperatorSet& grammar, unsigned arity, Rng& rng) {
  const std::size_t pos = std::uniform_int_distribution<std::size_t>(0, e.node_count() - 1)(rng);
  return e.replace_at(pos, random_terminal(arity, grammar, rng));
}

// ---------------------------------------------------------------------------
// Search state shared by all heuristics

namespace {

using Clock = std::chrono::steady_clock;

class Search {
 public:
  Search(const SampleSet& samples, const SearchConfig& cfg)
      : samples_(samples),
        cfg_(cfg),
        rng_(cfg.seed),
        scorer_(samples, cfg.objective),
        start_(Clock::now()),
        deadline_(start_ + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.timeout))) {}

  bool exhausted() const {
    if (cfg_.max_iterations != 0 && iterations_ >= cfg_.max_iterations) return true;
    return Clock::now() >= deadline_;
  }

  bool solved() const { return best_distance_ == 0.0; }

  /// Scores a candidate and records it if it beats the best so far. Oversized
  /// candidates get +inf without being evaluated.
  double score(const Expr& e) {
    if (e.node_count() > cfg_.max_nodes) return std::numeric_limits<double>::infinity();
    ++iterations_;
    const double d = scorer_(e);
    if (best_.empty() || d < best_distance_) {
      best_ = e;
      best_distance_ = d;
      trace_.push_back({elapsed(), d});
    }
    return d;
  }

  Expr mutate(const Expr& e) { return ilsynth::mutate(e, cfg_.operator_set, arity(), rng_, cfg_.leaf_probability); }
  Expr perturb(const Expr& e) { return ilsynth::perturb(e, cfg_.operator_set, arity(), rng_); }
  Expr terminal() { return random_terminal(arity(), cfg_.operator_set, rng_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

  /// Returns the final incumbent of the climb; stall_limit 0 disables stalling.
  std::pair<Expr, double> climb(Expr current, double d, std::size_t stall_limit) {
    std::size_t stall = 0;
    while (d > 0.0 && (stall_limit == 0 || stall < stall_limit) && !exhausted()) {
      Expr candidate = mutate(current);
      const double dc = score(candidate);
      if (dc < d) {
        current = std::move(candidate);
        d = dc;
        stall = 0;
      } else {
        ++stall;
      }
    }
    return {std::move(current), d};
  }

  SearchResult finish() const {
    SearchResult r;
    r.expr = best_;
    r.final_distance = best_distance_;
    r.iterations = iterations_;
    r.wall_time = elapsed();
    r.distance_trace = trace_;
    if (best_.empty())
      r.status = SearchStatus::Failure;
    else
      r.status = best_distance_ == 0.0 ? SearchStatus::Exact : SearchStatus::Best;
    return r;
  }

  const Expr& best() const { return best_; }
  const SearchConfig& cfg() const { return cfg_; }
  std::uint64_t iterations() const { return iterations_; }

 private:
  unsigned arity() const { return samples_.arity(); }
  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  const SampleSet& samples_;
  const SearchConfig& cfg_;
  Rng rng_;
  Scorer scorer_;
  Clock::time_point start_;
  Clock::time_point deadline_;
  std::uint64_t iterations_ = 0;
  Expr best_;
  double best_distance_ = std::numeric_limits<double>::infinity();
  std::vector<TracePoint> trace_;
};

void run_ils(Search& s) {
  Expr current = s.terminal();
  double d = s.score(current);
  while (!s.solved() && !s.exhausted()) {
    std::tie(current, d) = s.climb(std::move(current), d, s.cfg().stall_limit);
    if (s.solved()) break;
    // Restart from the best expression seen, perturbed; kept even if worse.
    current = s.perturb(s.best());
    d = s.score(current);
  }
}

void run_hill_climb(Search& s) {
  Expr start = s.terminal();
  const double d = s.score(start);
  s.climb(std::move(start), d, 0);
}

template <typename Accept>
void run_walk(Search& s, Accept accept) {
  Expr current = s.terminal();
  double d = s.score(current);
  while (!s.solved() && !s.exhausted()) {
    Expr candidate = s.mutate(current);
    const double dc = s.score(candidate);
    if (std::isfinite(dc) && accept(d, dc)) {
      current = std::move(candidate);
      d = dc;
    }
  }
}

}  // namespace

ClimbResult hill_climb(const Expr& start, const SampleSet& samples, const SearchConfig& cfg) {
  cfg.validate();
  Search s(samples, cfg);
  const double d = s.score(start);
  auto [e, dist] = s.climb(start, d, cfg.stall_limit);
  return {std::move(e), dist, s.iterations()};
}

SearchResult synthesize(const SampleSet& samples, const SearchConfig& cfg) {
  cfg.validate();
  if (samples.size() == 0) throw PreconditionError("empty sample set");
  if (cfg.heuristic == Heuristic::MCTS) {
    MctsConfig mc;
    mc.timeout = cfg.timeout;
    mc.seed = cfg.seed;
    mc.objective = cfg.objective;
    mc.operator_set = cfg.operator_set;
    if (cfg.max_iterations) mc.max_iterations = cfg.max_iterations;
    return mcts_synthesize(samples, mc);
  }
  Search s(samples, cfg);
  switch (cfg.heuristic) {
    case Heuristic::ILS:
      run_ils(s);
      break;
    case Heuristic::HillClimb:
      run_hill_climb(s);
      break;
    case Heuristic::RandomWalk:
      run_walk(s, [](double, double) { return true; });
      break;
    case Heuristic::SimAnneal: {
      double temperature = cfg.sa_initial_temperature;
      run_walk(s, [&](double d, double dc) {
        const bool ok = dc <= d || s.uniform() < std::exp(-(dc - d) / temperature);
        if (ok) temperature *= cfg.sa_cooling_factor;
        return ok;
      });
      break;
    }
    case Heuristic::MetropolisHastings:
      run_walk(s, [&](double d, double dc) { return dc <= d || s.uniform() < std::exp(-cfg.mh_beta * (dc - d)); });
      break;
    case Heuristic::MCTS:
      break;
  }
  return s.finish();
}

}  // namespace ilsynth
