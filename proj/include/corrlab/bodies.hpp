#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "corrlab/linalg.hpp"

namespace corrlab {

/// {x : |x_i| <= a_i}
struct Box {
  std::vector<double> half_widths;
};

/// {x : x^T M x <= 1}, M SPD.
struct Ellipsoid {
  SymMatrix shape;
};

/// {x : |<x, xi_i>| <= 1 for all i}
struct SlabPolytope {
  std::vector<std::vector<double>> normals;
};

//---------------------------------------------------------------------------//
/*!
 * Origin-symmetric convex body in R^k. Boundary points count as inside.
 */
class ConvexBody {
 public:
  using Shape = std::variant<Box, Ellipsoid, SlabPolytope>;

  explicit ConvexBody(Shape shape);

  static ConvexBody box(std::vector<double> half_widths);
  static ConvexBody unit_box(std::size_t k) { return box(std::vector<double>(k, 1.0)); }
  static ConvexBody ellipsoid(SymMatrix shape);
  static ConvexBody ball(std::size_t k, double radius = 1.0);
  static ConvexBody slabs(std::vector<std::vector<double>> normals);
  /// Unit square rotated by 45 degrees (k = 2).
  static ConvexBody rotated_square();

  std::size_t dim() const noexcept { return dim_; }
  bool bounded() const noexcept { return bounded_; }
  const Shape& shape() const noexcept { return shape_; }
  const char* kind() const noexcept;
  std::string describe() const;

  bool contains(std::span<const double> x) const;

 private:
  Shape shape_;
  std::size_t dim_ = 0;
  bool bounded_ = true;
};

/// Numerical rank of a vector family via Gram-Schmidt (relative tolerance).
std::size_t numerical_rank(const std::vector<std::vector<double>>& vectors, double tolerance = 1e-10);

}  // namespace corrlab
