#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace notf {

// Shapes of tensors/matrices disagree with what an operation requires.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Values outside the admissible domain (e.g. non-binary input to flip noise).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed input files. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  enum class Kind { Malformed, OutOfRange, Duplicate, Negative, RankMismatch, Io };

  ParseError(Kind kind, std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        kind_(kind),
        line_(line) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

// Non-finite values appeared during ADMM iterations.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t iteration, const std::string& what)
      : std::runtime_error("diverged at outer iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace notf
