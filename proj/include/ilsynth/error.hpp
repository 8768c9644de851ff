#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ilsynth {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax error in prefix notation. `position` is a 0-based character offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at offset " + std::to_string(position)), reason_(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
  std::size_t position_;
};

class MalformedExpr : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public SamplingError {
 public:
  using SamplingError::SamplingError;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ilsynth
