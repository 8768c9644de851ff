#include "ilsynth/oracle.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <csignal>
#include <cstring>
#include <random>
#include <set>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

namespace ilsynth {

SampleSet::SampleSet(unsigned arity, const std::vector<std::vector<Word>>& inputs,
                     const std::vector<Word>& outputs)
    : arity_(arity), columns_(arity) {
  if (inputs.size() != outputs.size())
    throw PreconditionError("sample set needs one output per input vector");
  std::set<std::vector<Word>> seen;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != arity)
      throw PreconditionError("input vector " + std::to_string(i) + " has length " +
                              std::to_string(inputs[i].size()) + ", expected " + std::to_string(arity));
    if (!seen.insert(inputs[i]).second) continue;
    for (unsigned v = 0; v < arity; ++v) columns_[v].push_back(inputs[i][v]);
    outputs_.push_back(outputs[i]);
  }
  if (outputs_.empty()) throw PreconditionError("sample set must contain at least one sample");
}

std::vector<Word> SampleSet::input(std::size_t i) const {
  std::vector<Word> row(arity_);
  for (unsigned v = 0; v < arity_; ++v) row[v] = columns_[v][i];
  return row;
}

void SamplingStrategy::validate() const {
  if (n_random + constant_vectors.size() < 1)
    throw PreconditionError("sampling strategy yields no samples");
  if (range_lo > range_hi) throw PreconditionError("sampling range is empty");
  if (branch_aware && branch_aware->constants.empty())
    throw PreconditionError("branch-aware sampling needs at least one condition constant");
}

namespace {

Word out_of_set_value(const std::vector<Word>& constants, std::int32_t lo, std::int32_t hi,
                      std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> dist(lo, hi);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Word w = static_cast<Word>(static_cast<std::int32_t>(dist(rng)));
    if (std::find(constants.begin(), constants.end(), w) == constants.end()) return w;
  }
  return *std::max_element(constants.begin(), constants.end()) + 1;
}

}  // namespace

std::vector<std::vector<Word>> draw_inputs(unsigned arity, const SamplingStrategy& s) {
  s.validate();
  const std::size_t total = s.n_random + s.constant_vectors.size();
  std::mt19937_64 rng(s.seed);
  std::uniform_int_distribution<std::int64_t> comp(s.range_lo, s.range_hi);

  const BranchAware* ba = s.branch_aware ? &*s.branch_aware : nullptr;
  if (ba && ba->input_index >= arity)
    throw PreconditionError("branch-aware input index " + std::to_string(ba->input_index) +
                            " out of range for arity " + std::to_string(arity));
  auto condition_for = [&](std::size_t final_index) -> Word {
    const std::size_t k = ba->constants.size();
    const std::size_t cls = final_index % (k + 1);
    if (cls < k) return ba->constants[cls];
    return out_of_set_value(ba->constants, s.range_lo, s.range_hi, rng);
  };

  std::vector<std::vector<Word>> constants;
  for (std::size_t j = 0; j < s.constant_vectors.size(); ++j) {
    std::vector<Word> row(arity, s.constant_vectors[j]);
    if (ba) row[ba->input_index] = condition_for(s.n_random + j);
    constants.push_back(std::move(row));
  }
  std::set<std::vector<Word>> seen(constants.begin(), constants.end());

  std::vector<std::vector<Word>> out;
  out.reserve(total);
  for (std::size_t i = 0; i < s.n_random; ++i) {
    const Word cond = ba ? condition_for(i) : 0;
    std::vector<Word> row(arity);
    // Redraw on collision so the random part stays duplicate-free; gives up
    // when the input space is too small.
    for (int attempt = 0; attempt < 1000; ++attempt) {
      for (auto& w : row) w = static_cast<Word>(static_cast<std::int32_t>(comp(rng)));
      if (ba) row[ba->input_index] = cond;
      if (seen.insert(row).second) {
        out.push_back(row);
        break;
      }
    }
  }
  for (auto& row : constants) out.push_back(std::move(row));
  return out;
}

SampleSet sample_expr(const Expr& target, const SamplingStrategy& strategy) {
  return sample_expr(target, target.min_arity(), strategy);
}

SampleSet sample_expr(const Expr& target, unsigned arity, const SamplingStrategy& strategy) {
  if (target.min_arity() > arity)
    throw PreconditionError("target uses v" + std::to_string(target.min_arity() - 1) +
                            " but the task arity is " + std::to_string(arity));
  const auto inputs = draw_inputs(arity, strategy);
  std::vector<Word> outputs;
  outputs.reserve(inputs.size());
  for (const auto& row : inputs) outputs.push_back(evaluate(target, row));
  return SampleSet(arity, inputs, outputs);
}

SampleSet sample_external(const std::string& command, unsigned arity, const SamplingStrategy& strategy) {
  const auto inputs = draw_inputs(arity, strategy);
  ExternalOracle oracle(command);
  std::vector<Word> outputs;
  outputs.reserve(inputs.size());
  for (const auto& row : inputs) outputs.push_back(oracle.query(row));
  return SampleSet(arity, inputs, outputs);
}

// ---------------------------------------------------------------------------
// Line protocol

std::string format_request(std::span<const Word> input) {
  std::string line;
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (i) line += ' ';
    line += std::to_string(static_cast<std::int32_t>(input[i]));
  }
  line += '\n';
  return line;
}

Word parse_reply(const std::string& line) {
  std::string_view t(line);
  while (!t.empty() && (t.back() == '\r' || t.back() == ' ' || t.back() == '\t')) t.remove_suffix(1);
  while (!t.empty() && (t.front() == ' ' || t.front() == '\t')) t.remove_prefix(1);
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size())
    throw ProtocolError("non-numeric oracle reply '" + line + "'");
  if (v < -(std::int64_t{1} << 31) || v > 0xFFFFFFFFLL)
    throw ProtocolError("oracle reply out of 32-bit range '" + line + "'");
  return static_cast<Word>(v);
}

ExternalOracle::ExternalOracle(const std::string& command) {
  std::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0) throw SamplingError(std::string("pipe failed: ") + std::strerror(errno));
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw SamplingError(std::string("pipe failed: ") + std::strerror(errno));
  }
  const pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    throw SamplingError(std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

ExternalOracle::~ExternalOracle() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

Word ExternalOracle::query(std::span<const Word> input) {
  const std::string request = format_request(input);
  std::size_t written = 0;
  while (written < request.size()) {
    const ssize_t n = write(to_child_, request.data() + written, request.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw SamplingError("oracle process rejected request '" + request.substr(0, request.size() - 1) +
                          "': " + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  return parse_reply(read_line(request));
}

std::string ExternalOracle::read_line(const std::string& request) {
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[4096];
    const ssize_t n = read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0)
      throw SamplingError("oracle process ended without replying to '" +
                          request.substr(0, request.size() - 1) + "'" +
                          (buffer_.empty() ? std::string() : " (partial reply '" + buffer_ + "')"));
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

}  // namespace ilsynth
