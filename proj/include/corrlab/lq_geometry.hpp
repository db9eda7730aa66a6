#pragma once

#include <vector>

#include "corrlab/rng.hpp"

namespace corrlab {

/// Step function on [0,1]: value `values[j]` on a piece of length `weights[j]`.
/// Stands in for an element of L_q([0,1]).
class StepFunction {
 public:
  StepFunction(std::vector<double> weights, std::vector<double> values);

  static StepFunction constant(double value) { return StepFunction({1.0}, {value}); }

  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t pieces() const noexcept { return weights_.size(); }

  bool shares_partition(const StepFunction& other) const noexcept {
    return weights_ == other.weights_;
  }

  StepFunction scaled(double c) const;
  /// this + sign * other on the shared partition.
  StepFunction combined(const StepFunction& other, double sign) const;

 private:
  std::vector<double> weights_;
  std::vector<double> values_;
};

/// ||f||_q^q = sum_j w_j |f_j|^q, for q in (0, 2].
double lq_qnorm(const StepFunction& f, double q);

/// 2(||xi||^q + ||eta||^q) - ||xi+eta||^q - ||xi-eta||^q  (>= 0 for q <= 2).
double clarkson_orlicz_gap(const StepFunction& xi, const StepFunction& eta, double q);

/// exp(-||xi+eta||^q) + exp(-||xi-eta||^q) - 2 exp(-||xi||^q - ||eta||^q).
double lemma1_gap(const StepFunction& xi, const StepFunction& eta, double q);

/// Random partition of [0,1] into `pieces` parts (uniform spacings, all > 0).
std::vector<double> random_partition(RngStream& rng, std::size_t pieces);

/// Step function on `weights` with standard normal values.
StepFunction random_step_function(RngStream& rng, const std::vector<double>& weights);

}  // namespace corrlab
