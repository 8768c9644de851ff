#include "ilsynth/objective.hpp"

#include <bit>
#include <cctype>
#include <string>
#include <cmath>
#include <cstdint>

namespace ilsynth {

Objective objective_from_name(std::string_view raw) {
  std::string name(raw);
  for (char& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (name == "logarith") return Objective::LogArith;
  if (name == "arith") return Objective::Arith;
  if (name == "hamming") return Objective::Hamming;
  if (name == "xor") return Objective::Xor;
  throw PreconditionError("unknown objective '" + name + "'");
}

std::string_view objective_name(Objective obj) {
  switch (obj) {
    case Objective::LogArith:
      return "logarith";
    case Objective::Arith:
      return "arith";
    case Objective::Hamming:
      return "hamming";
    case Objective::Xor:
      return "xor";
  }
  return "?";
}

double sample_distance(Objective obj, Word candidate, Word target) {
  switch (obj) {
    case Objective::LogArith:
    case Objective::Arith: {
      const std::int64_t d = std::int64_t{static_cast<std::int32_t>(candidate)} -
                             std::int64_t{static_cast<std::int32_t>(target)};
      const double abs = static_cast<double>(d < 0 ? -d : d);
      return obj == Objective::Arith ? abs : std::log2(1.0 + abs);
    }
    case Objective::Hamming:
      return std::popcount(candidate ^ target);
    case Objective::Xor:
      return static_cast<double>(candidate ^ target);
  }
  return 0.0;
}

double distance(Objective obj, std::span<const Word> candidate, std::span<const Word> target) {
  if (candidate.size() != target.size()) throw PreconditionError("output vectors differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < candidate.size(); ++i)
    if (candidate[i] != target[i]) sum += sample_distance(obj, candidate[i], target[i]);
  return sum;
}

Scorer::Scorer(const SampleSet& samples, Objective obj)
    : samples_(&samples), obj_(obj), outputs_(samples.size()) {}

double Scorer::operator()(const Expr& candidate) {
  eval_.run(candidate, samples_->columns(), outputs_);
  return distance(obj_, outputs_, samples_->outputs());
}

double distance(Objective obj, const Expr& candidate, const SampleSet& samples) {
  if (candidate.min_arity() > samples.arity())
    throw PreconditionError("candidate uses more inputs than the sample set provides");
  Scorer scorer(samples, obj);
  return scorer(candidate);
}

}  // namespace ilsynth
