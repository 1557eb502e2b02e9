#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace magnus {

/// Bad user-supplied data: out-of-range indices, mismatched dimensions,
/// impossible generator parameters.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed text input. line() is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// An internal precondition was broken (planner or caller bug).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A single coarse-level row does not fit the configured memory budget.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, std::size_t row) : std::runtime_error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace magnus
