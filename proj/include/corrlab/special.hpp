#pragma once

#include <cmath>
#include <functional>
#include <numbers>

namespace corrlab {

/// Standard normal CDF, Phi(x) = erfc(-x / sqrt 2) / 2.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b].
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double relative_tolerance = 1e-14, unsigned max_depth = 15);

}  // namespace corrlab
