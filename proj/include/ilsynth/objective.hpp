#pragma once

#include <span>
#include <string>
#include <string_view>

#include "ilsynth/expr.hpp"
#include "ilsynth/oracle.hpp"

namespace ilsynth {

enum class Objective { LogArith, Arith, Hamming, Xor };

Objective objective_from_name(std::string_view name);
std::string_view objective_name(Objective obj);

/// Per-sample distance. Arithmetic kinds read both words as signed 32-bit and
/// subtract in 64-bit.
double sample_distance(Objective obj, Word candidate, Word target);

/// Sum of per-sample distances, accumulated in sample order.
double distance(Objective obj, std::span<const Word> candidate, std::span<const Word> target);

/// Scores an expression against a sample set, reusing scratch buffers.
class Scorer {
 public:
  Scorer(const SampleSet& samples, Objective obj);

  double operator()(const Expr& candidate);
  const SampleSet& samples() const { return *samples_; }
  Objective objective() const { return obj_; }
  std::span<const Word> last_outputs() const { return outputs_; }

 private:
  const SampleSet* samples_;
  Objective obj_;
  BatchEvaluator eval_;
  std::vector<Word> outputs_;
};

double distance(Objective obj, const Expr& candidate, const SampleSet& samples);

}  // namespace ilsynth
