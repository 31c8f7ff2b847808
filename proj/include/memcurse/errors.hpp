#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace memcurse {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A closed form was evaluated at or beyond one of its poles.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// A parameter lies outside the admissible domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Shapes of the operands do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An iterative method did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations)
      : Error(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

/// A caller violated a documented precondition (e.g. non-symmetric input).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared; carries the labels of the offending entries.
class OverflowError : public Error {
 public:
  OverflowError(const std::string& what, std::vector<std::string> labels)
      : Error(what), labels_(std::move(labels)) {}
  const std::vector<std::string>& labels() const noexcept { return labels_; }

 private:
  std::vector<std::string> labels_;
};

/// Every cell of a learning-rate sweep diverged.
class SweepFailureError : public Error {
 public:
  using Error::Error;
};

}  // namespace memcurse
