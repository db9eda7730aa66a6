#include "corrlab/bodies.hpp"

#include <cmath>
#include <sstream>

#include "corrlab/error.hpp"

namespace corrlab {

ConvexBody::ConvexBody(Shape shape) : shape_(std::move(shape)) {
  if (const auto* b = std::get_if<Box>(&shape_)) {
    require(!b->half_widths.empty(), "box: no half-widths");
    for (double a : b->half_widths) require(std::isfinite(a) && a > 0.0, "box: half-widths must be > 0");
    dim_ = b->half_widths.size();
  } else if (const auto* e = std::get_if<Ellipsoid>(&shape_)) {
    require(e->shape.dim() >= 1, "ellipsoid: empty shape matrix");
    try {
      (void)cholesky(e->shape);
    } catch (const NotSpdError& err) {
      throw InvalidArgument(std::string("ellipsoid: shape matrix ") + err.what());
    }
    dim_ = e->shape.dim();
  } else {
    const auto& s = std::get<SlabPolytope>(shape_);
    require(!s.normals.empty(), "slabs: no normals");
    dim_ = s.normals.front().size();
    require(dim_ >= 1, "slabs: zero-dimensional normals");
    for (const auto& v : s.normals) {
      require(v.size() == dim_, "slabs: normal dimension mismatch");
      for (double x : v) require(std::isfinite(x), "slabs: non-finite entry");
    }
    bounded_ = numerical_rank(s.normals) == dim_;
  }
}

ConvexBody ConvexBody::box(std::vector<double> half_widths) { return ConvexBody(Box{std::move(half_widths)}); }

ConvexBody ConvexBody::ellipsoid(SymMatrix shape) { return ConvexBody(Ellipsoid{std::move(shape)}); }

ConvexBody ConvexBody::ball(std::size_t k, double radius) {
  require(radius > 0.0, "ball: radius must be > 0");
  SymMatrix m(k);
  for (std::size_t i = 0; i < k; ++i) m(i, i) = 1.0 / (radius * radius);
  return ellipsoid(std::move(m));
}

ConvexBody ConvexBody::slabs(std::vector<std::vector<double>> normals) {
  return ConvexBody(SlabPolytope{std::move(normals)});
}

ConvexBody ConvexBody::rotated_square() {
  const double c = std::sqrt(0.5);
  return slabs({{c, c}, {c, -c}});
}

const char* ConvexBody::kind() const noexcept {
  switch (shape_.index()) {
    case 0: return "box";
    case 1: return "ellipsoid";
    default: return "slabs";
  }
}

std::string ConvexBody::describe() const {
  std::ostringstream os;
  os << kind() << "(k=" << dim_ << (bounded_ ? "" : ", unbounded") << ")";
  return os.str();
}

bool ConvexBody::contains(std::span<const double> x) const {
  require(x.size() == dim_, "contains: dimension mismatch");
  if (const auto* b = std::get_if<Box>(&shape_)) {
    for (std::size_t i = 0; i < dim_; ++i)
      if (std::abs(x[i]) > b->half_widths[i]) return false;
    return true;
  }
  if (const auto* e = std::get_if<Ellipsoid>(&shape_)) {
    double q = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      q += e->shape(i, i) * x[i] * x[i];
      for (std::size_t j = 0; j < i; ++j) q += 2.0 * e->shape(i, j) * x[i] * x[j];
    }
    return q <= 1.0;
  }
  for (const auto& v : std::get<SlabPolytope>(shape_).normals) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) s += v[i] * x[i];
    if (std::abs(s) > 1.0) return false;
  }
  return true;
}

std::size_t numerical_rank(const std::vector<std::vector<double>>& vectors, double tolerance) {
  if (vectors.empty()) return 0;
  double scale = 0.0;
  for (const auto& v : vectors) scale = std::max(scale, std::sqrt(dot(v, v)));
  if (scale == 0.0) return 0;
  std::vector<std::vector<double>> basis;
  for (const auto& v : vectors) {
    std::vector<double> r(v);
    // Two Gram-Schmidt passes for stability.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        const double c = dot(r, b);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= c * b[i];
      }
    const double norm = std::sqrt(dot(r, r));
    if (norm > tolerance * scale) {
      for (double& x : r) x /= norm;
      basis.push_back(std::move(r));
    }
  }
  return basis.size();
}

}  // namespace corrlab
