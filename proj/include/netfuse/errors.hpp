#pragma once

#include <stdexcept>
#include <string>

namespace netfuse {

// Malformed input text (network files, tables). Carries the 1-based line
// number when one is known; line 0 means "not line-specific".
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Structurally valid input that cannot be analyzed (missing files, degenerate
// held-out networks, undefined AUC, ...).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite results, failed factorizations, and similar numeric breakdowns.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace netfuse
