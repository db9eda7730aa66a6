#include "corrlab/lq_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "corrlab/error.hpp"

namespace corrlab {
namespace {

void require_q(double q) {
  require(q > 0.0 && q <= 2.0, "q must lie in (0, 2]");
}

void require_shared(const StepFunction& a, const StepFunction& b) {
  require(a.shares_partition(b), "step functions must share a partition");
}

}  // namespace

StepFunction::StepFunction(std::vector<double> weights, std::vector<double> values)
    : weights_(std::move(weights)), values_(std::move(values)) {
  require(!weights_.empty(), "StepFunction: no pieces");
  require(weights_.size() == values_.size(), "StepFunction: weights/values length mismatch");
  double total = 0.0;
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    require(std::isfinite(weights_[j]) && weights_[j] > 0.0, "StepFunction: weights must be > 0");
    require(std::isfinite(values_[j]), "StepFunction: non-finite value");
    total += weights_[j];
  }
  require(std::abs(total - 1.0) <= 1e-12, "StepFunction: weights must sum to 1");
}

StepFunction StepFunction::scaled(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= c;
  return {weights_, std::move(v)};
}

StepFunction StepFunction::combined(const StepFunction& other, double sign) const {
  require_shared(*this, other);
  std::vector<double> v(values_);
  for (std::size_t j = 0; j < v.size(); ++j) v[j] += sign * other.values_[j];
  return {weights_, std::move(v)};
}

double lq_qnorm(const StepFunction& f, double q) {
  require_q(q);
  double s = 0.0;
  for (std::size_t j = 0; j < f.pieces(); ++j) s += f.weights()[j] * std::pow(std::abs(f.values()[j]), q);
  return s;
}

double clarkson_orlicz_gap(const StepFunction& xi, const StepFunction& eta, double q) {
  require_q(q);
  require_shared(xi, eta);
  const double sum = lq_qnorm(xi.combined(eta, 1.0), q);
  const double diff = lq_qnorm(xi.combined(eta, -1.0), q);
  return 2.0 * (lq_qnorm(xi, q) + lq_qnorm(eta, q)) - sum - diff;
}

double lemma1_gap(const StepFunction& xi, const StepFunction& eta, double q) {
  require_q(q);
  require_shared(xi, eta);
  const double sum = lq_qnorm(xi.combined(eta, 1.0), q);
  const double diff = lq_qnorm(xi.combined(eta, -1.0), q);
  return std::exp(-sum) + std::exp(-diff) - 2.0 * std::exp(-lq_qnorm(xi, q) - lq_qnorm(eta, q));
}

std::vector<double> random_partition(RngStream& rng, std::size_t pieces) {
  require(pieces >= 1, "random_partition: need at least one piece");
  // Normalized exponential spacings give a uniform random partition.
  std::vector<double> w(pieces);
  for (double& x : w) x = rng.exponential();
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  // Absorb the rounding residue into the largest piece so the sum is 1.
  const double residue = 1.0 - std::accumulate(w.begin(), w.end(), 0.0);
  *std::max_element(w.begin(), w.end()) += residue;
  return w;
}

StepFunction random_step_function(RngStream& rng, const std::vector<double>& weights) {
  std::vector<double> v(weights.size());
  for (double& x : v) x = rng.normal();
  return {weights, std::move(v)};
}

}  // namespace corrlab
