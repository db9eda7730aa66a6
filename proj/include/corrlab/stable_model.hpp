#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "corrlab/lq_geometry.hpp"
#include "corrlab/parallel.hpp"
#include "corrlab/rng.hpp"
#include "corrlab/stats.hpp"

namespace corrlab {

struct SpectralAtom {
  double weight = 0.0;
  std::vector<double> vector;
};

//---------------------------------------------------------------------------//
/*!
 * Symmetric q-stable random vector Y in R^n with a discrete spectral measure.
 *
 * The characteristic function is
 *   phi(theta) = exp(-sum_j w_j |<theta, v_j>|^q),
 * which is the step-function form exp(-|| sum_i theta_i s_i ||_q^q) with s_i
 * taking value v_j[i] on the j-th piece of a partition with lengths w_j.
 *
 * For q = 2 the marginals have variance 2 (char. function exp(-t^2)), not 1.
 */
class StableModel {
 public:
  StableModel(double q, std::vector<SpectralAtom> atoms);

  /// Build from spectral step functions s_1..s_n sharing one partition.
  static StableModel from_step_functions(double q, const std::vector<StepFunction>& spectral);

  double q() const noexcept { return q_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<SpectralAtom>& atoms() const noexcept { return atoms_; }

  /// sum_j w_j |<theta, v_j>|^q, the exponent of the characteristic function.
  double exponent(std::span<const double> theta) const;

 private:
  double q_;
  std::size_t dim_;
  std::vector<SpectralAtom> atoms_;
};

/// Linear functionals xi_1..xi_k in R^n; X_i = <Y, xi_i>.
class Functionals {
 public:
  explicit Functionals(std::vector<std::vector<double>> vectors);

  std::size_t count() const noexcept { return vectors_.size(); }
  std::size_t dim() const noexcept { return vectors_.front().size(); }
  const std::vector<std::vector<double>>& vectors() const noexcept { return vectors_; }
  const std::vector<double>& operator[](std::size_t i) const { return vectors_[i]; }

 private:
  std::vector<std::vector<double>> vectors_;
};

double char_value(const StableModel& model, std::span<const double> theta);

/// Standard symmetric q-stable variate (char. function exp(-|t|^q)), by the
/// Chambers-Mallows-Stuck transform.
double sample_standard_stable(double q, RngStream& rng);

/// Y = sum_j w_j^{1/q} Z_j v_j with Z_j i.i.d. standard symmetric q-stable.
void sample_vector(const StableModel& model, RngStream& rng, std::span<double> out);
std::vector<double> sample_vector(const StableModel& model, RngStream& rng);

/// Law of (X_1..X_k): atoms become (w_j, Xi v_j).
StableModel project(const StableModel& model, const Functionals& xi);

/// sum_i u_i xi_i in R^n.
std::vector<double> pull_back(const Functionals& xi, std::span<const double> u);

/// Empirical E cos(<theta, Y>) over `n_samples` draws, one estimate per theta.
std::vector<McEstimate> empirical_char_function(const StableModel& model,
                                                const std::vector<std::vector<double>>& thetas,
                                                std::size_t n_samples, const RngStream& rng,
                                                Execution exec = {});

/// Random model for property tests: n-dimensional, `atoms` atoms with
/// exponential-spacing weights and Gaussian vectors.
StableModel random_stable_model(RngStream& rng, double q, std::size_t n, std::size_t atoms);

Functionals random_functionals(RngStream& rng, std::size_t k, std::size_t n);

}  // namespace corrlab
