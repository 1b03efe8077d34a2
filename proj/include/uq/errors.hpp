#pragma once

#include <stdexcept>
#include <string>

namespace uq {

/// Argument outside the mathematical domain of a function (negative x, u not in (0,1), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative method failed to converge or a factorization broke down.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration. `line` is 0 when the error did not come from a file.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Caller violated a precondition (size mismatch, degenerate element, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A single Monte Carlo realization could not be computed; the sampler draws a replacement.
class SampleFailure : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace uq
