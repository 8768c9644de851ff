#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ilsynth/expr.hpp"

namespace ilsynth {

/// Paired input vectors and observed outputs. Inputs are stored column-major
/// (one column per input slot) for batch evaluation.
class SampleSet {
 public:
  /// Rows must all have length `arity`; duplicate rows are dropped (first kept).
  SampleSet(unsigned arity, const std::vector<std::vector<Word>>& inputs, const std::vector<Word>& outputs);

  unsigned arity() const { return arity_; }
  std::size_t size() const { return outputs_.size(); }
  std::vector<Word> input(std::size_t i) const;
  std::span<const std::vector<Word>> columns() const { return columns_; }
  std::span<const Word> outputs() const { return outputs_; }

  friend bool operator==(const SampleSet&, const SampleSet&) = default;

 private:
  unsigned arity_;
  std::vector<std::vector<Word>> columns_;
  std::vector<Word> outputs_;
};

/// Makes the designated input slot cycle through `constants` plus one
/// out-of-set value, so that every branch of a merged handler is hit equally.
struct BranchAware {
  unsigned input_index = 2;
  std::vector<Word> constants;
};

struct SamplingStrategy {
  std::size_t n_random = 95;
  std::int32_t range_lo = -50;
  std::int32_t range_hi = 49;
  /// Each entry is broadcast to every input slot.
  std::vector<Word> constant_vectors{0u, 1u, 0xFFFFFFFFu, 0x80000000u, 0x7FFFFFFFu};
  std::uint64_t seed = 0;
  std::optional<BranchAware> branch_aware;

  void validate() const;
};

/// Input vectors only: `n_random` distinct random vectors drawn uniformly per
/// component from the range, followed by the constant vectors.
std::vector<std::vector<Word>> draw_inputs(unsigned arity, const SamplingStrategy& strategy);

SampleSet sample_expr(const Expr& target, const SamplingStrategy& strategy);
SampleSet sample_expr(const Expr& target, unsigned arity, const SamplingStrategy& strategy);

/// Runs `command` through /bin/sh and queries it once per input vector using
/// the line protocol: request = space-separated signed decimals, reply = one
/// signed decimal.
SampleSet sample_external(const std::string& command, unsigned arity, const SamplingStrategy& strategy);

/// Child process speaking the line protocol. Closing its stdin ends the session.
class ExternalOracle {
 public:
  explicit ExternalOracle(const std::string& command);
  ~ExternalOracle();
  ExternalOracle(const ExternalOracle&) = delete;
  ExternalOracle& operator=(const ExternalOracle&) = delete;

  Word query(std::span<const Word> input);

 private:
  std::string read_line(const std::string& request);

  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

std::string format_request(std::span<const Word> input);
/// Parses one reply line; throws ProtocolError on anything but a 32-bit integer.
Word parse_reply(const std::string& line);

}  // namespace ilsynth
