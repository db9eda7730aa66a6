#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "corrlab/rng.hpp"

namespace corrlab {

struct CosineTerm {
  double mass = 0.0;
  std::vector<double> frequency;
};

struct MeasureAtom {
  std::vector<double> point;
  double mass = 0.0;
};

/// f(x) = sum_p a_p cos(<t_p, x>) with a_p > 0. Even and positive definite;
/// its Bochner measure is sum_p (a_p / 2)(delta_{t_p} + delta_{-t_p}).
class CosinePolynomial {
 public:
  CosinePolynomial(std::size_t dim, std::vector<CosineTerm> terms);

  /// The constant function c on R^dim.
  static CosinePolynomial constant(std::size_t dim, double c);

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<CosineTerm>& terms() const noexcept { return terms_; }
  double at_origin() const noexcept;

  CosinePolynomial scaled(double c) const;

 private:
  std::size_t dim_;
  std::vector<CosineTerm> terms_;
};

// 1-D even components of a product function.

/// t -> (1 - |t|)_+
struct Triangle {};

/// t -> exp(-|t|^q), q in (0, 2]
struct StretchedExp {
  double q = 1.0;
};

/// Tabulated even function on [0, inf): linear interpolation on `grid`,
/// constant past the last node. Validated convex and nonincreasing with
/// value 1 at 0 (the Polya criterion) on construction.
class PolyaConvex {
 public:
  PolyaConvex(std::vector<double> grid, std::vector<double> values);

  const std::vector<double>& grid() const noexcept { return grid_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator()(double t) const;

 private:
  std::vector<double> grid_;
  std::vector<double> values_;
};

using ProductComponent = std::variant<Triangle, StretchedExp, PolyaConvex>;

double evaluate_component(const ProductComponent& c, double t);

/// f(x) = prod_i c_i(x_i).
class ProductFunction {
 public:
  explicit ProductFunction(std::vector<ProductComponent> components);

  std::size_t dim() const noexcept { return components_.size(); }
  const std::vector<ProductComponent>& components() const noexcept { return components_; }

 private:
  std::vector<ProductComponent> components_;
};

/// x -> min(|x|^2, cap). Even and bounded but not positive definite; used only
/// as an empirical probe for even convex-type functions.
struct CappedQuadratic {
  std::size_t dim = 1;
  double cap = 10.0;
};

using CatalogFunction = std::variant<CosinePolynomial, ProductFunction, CappedQuadratic>;

double evaluate(const CosinePolynomial& f, std::span<const double> x);
double evaluate(const ProductFunction& f, std::span<const double> x);
double evaluate(const CappedQuadratic& f, std::span<const double> x);
double evaluate(const CatalogFunction& f, std::span<const double> x);

std::size_t dimension(const CatalogFunction& f);
bool is_positive_definite(const CatalogFunction& f);
std::string describe(const CatalogFunction& f);

/// Symmetric atom list of the Bochner measure of f.
std::vector<MeasureAtom> representing_measure(const CosinePolynomial& f);

/// P terms, masses uniform in (0, 1], frequencies N(0, freq_scale^2) per entry.
CosinePolynomial random_cosine_polynomial(RngStream& rng, std::size_t dim, std::size_t terms,
                                          double freq_scale);

/// Density of the Bochner measure of a compactly supported component,
/// (1/2pi) int c(t) cos(omega t) dt, by adaptive quadrature.
double bochner_density(const ProductComponent& c, double omega);

}  // namespace corrlab
