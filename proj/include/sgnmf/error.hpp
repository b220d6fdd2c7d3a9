#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgnmf {

/// Input data could not be read or is structurally unusable (missing file,
/// malformed line, empty graph, incomplete ground truth).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A malformed line in a text input. `line()` is 1-based.
class ParseError : public DataError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Matrix shapes that do not fit together.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The solver produced a non-finite objective.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::size_t iteration, double value)
      : std::runtime_error("non-finite objective " + std::to_string(value) +
                           " at iteration " + std::to_string(iteration)),
        iteration_(iteration),
        value_(value) {}

  std::size_t iteration() const noexcept { return iteration_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t iteration_;
  double value_;
};

}  // namespace sgnmf
