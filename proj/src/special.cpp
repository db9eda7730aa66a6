#include "corrlab/special.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace corrlab {

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double relative_tolerance, unsigned max_depth) {
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, max_depth, relative_tolerance, &error);
  return {value, error};
}

}  // namespace corrlab
