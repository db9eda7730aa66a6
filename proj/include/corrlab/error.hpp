#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace corrlab {

/// Input rejected by a precondition check (dimension mismatch, range error).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Cholesky factorization hit a pivot at or below the SPD tolerance.
class NotSpdError : public std::runtime_error {
 public:
  NotSpdError(std::size_t pivot_index, double pivot_value)
      : std::runtime_error("not SPD: pivot " + std::to_string(pivot_index) +
                           " = " + std::to_string(pivot_value)),
        pivot_index_(pivot_index),
        pivot_value_(pivot_value) {}

  std::size_t pivot_index() const noexcept { return pivot_index_; }
  double pivot_value() const noexcept { return pivot_value_; }

 private:
  std::size_t pivot_index_;
  double pivot_value_;
};

/// The assembled block covariance [[A,B],[B^T,C]] is not positive definite.
class InvalidCovariance : public std::runtime_error {
 public:
  explicit InvalidCovariance(const std::string& what)
      : std::runtime_error("invalid B: " + what) {}
};

/// A test function failed to evaluate at a particular Monte Carlo sample.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(std::size_t sample_index, const std::string& what)
      : std::runtime_error("evaluation failed at sample " +
                           std::to_string(sample_index) + ": " + what),
        sample_index_(sample_index) {}

  std::size_t sample_index() const noexcept { return sample_index_; }

 private:
  std::size_t sample_index_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace corrlab
