#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "ilsynth/expr.hpp"
#include "ilsynth/grammar.hpp"
#include "ilsynth/objective.hpp"
#include "ilsynth/oracle.hpp"

namespace ilsynth {

using Rng = std::mt19937_64;

enum class Heuristic { ILS, HillClimb, RandomWalk, SimAnneal, MetropolisHastings, MCTS };

Heuristic heuristic_from_name(std::string_view name);
std::string_view heuristic_name(Heuristic h);

enum class SearchStatus { Exact, Best, Failure };

std::string_view status_name(SearchStatus s);

struct TracePoint {
  double time;
  double distance;
};

struct SearchResult {
  SearchStatus status = SearchStatus::Failure;
  Expr expr;
  double final_distance = 0.0;
  std::uint64_t iterations = 0;
  double wall_time = 0.0;
  /// One point per improvement of the best-so-far distance.
  std::vector<TracePoint> distance_trace;
};

struct SearchConfig {
  Heuristic heuristic = Heuristic::ILS;
  OperatorSet operator_set = OperatorSet::expr();
  Objective objective = Objective::LogArith;
  double timeout = 60.0;
  /// Consecutive non-improving mutations before a hill climb gives up.
  std::size_t stall_limit = 100;
  std::uint64_t seed = 0;
  /// Candidate evaluations allowed; 0 means bounded by the timeout only.
  std::uint64_t max_iterations = 0;
  /// Probability that a mutation plants a leaf rather than a one-operator tree.
  double leaf_probability = 0.5;
  /// Candidates with more nodes are discarded unevaluated.
  std::size_t max_nodes = 10000;
  double sa_initial_temperature = 50.0;
  double sa_cooling_factor = 0.999;
  double mh_beta = 0.5;

  void validate() const;
};

/// Uniform over the task's variables and the grammar's constants.
Expr random_terminal(unsigned arity, const OperatorSet& grammar, Rng& rng);

/// One operator from the grammar applied to random terminals. ITE nodes
/// compare their scrutinee against 0.
Expr random_depth_one(unsigned arity, const OperatorSet& grammar, Rng& rng);

/// Replaces one uniformly chosen node by a leaf or by a depth-one tree.
Expr mutate(const Expr& e, const OperatorSet& grammar, unsigned arity, Rng& rng,
            double leaf_probability = 0.5);

/// Replaces one uniformly chosen node by a random terminal.
Expr perturb(const Expr& e, const OperatorSet& grammar, unsigned arity, Rng& rng);

struct ClimbResult {
  Expr expr;
  double distance;
  std::uint64_t iterations;
};

/// Strict-improvement hill climbing from `start`; stops after
/// `cfg.stall_limit` consecutive inconclusive mutations, on distance 0, or
/// when the budget runs out.
ClimbResult hill_climb(const Expr& start, const SampleSet& samples, const SearchConfig& cfg);

/// Runs the configured S-metaheuristic (or MCTS with default MCTS settings).
SearchResult synthesize(const SampleSet& samples, const SearchConfig& cfg);

}  // namespace ilsynth
