#include "corrlab/posdef_catalog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "corrlab/error.hpp"
#include "corrlab/linalg.hpp"
#include "corrlab/special.hpp"

namespace corrlab {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

CosinePolynomial::CosinePolynomial(std::size_t dim, std::vector<CosineTerm> terms)
    : dim_(dim), terms_(std::move(terms)) {
  require(dim_ >= 1, "CosinePolynomial: dimension must be >= 1");
  require(!terms_.empty(), "CosinePolynomial: no terms");
  for (const auto& term : terms_) {
    require(std::isfinite(term.mass) && term.mass > 0.0, "CosinePolynomial: masses must be > 0");
    require(term.frequency.size() == dim_, "CosinePolynomial: frequency dimension mismatch");
    for (double t : term.frequency) require(std::isfinite(t), "CosinePolynomial: non-finite frequency");
  }
}

CosinePolynomial CosinePolynomial::constant(std::size_t dim, double c) {
  return {dim, {CosineTerm{c, std::vector<double>(dim, 0.0)}}};
}

double CosinePolynomial::at_origin() const noexcept {
  double s = 0.0;
  for (const auto& term : terms_) s += term.mass;
  return s;
}

CosinePolynomial CosinePolynomial::scaled(double c) const {
  std::vector<CosineTerm> t(terms_);
  for (auto& term : t) term.mass *= c;
  return {dim_, std::move(t)};
}

PolyaConvex::PolyaConvex(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  require(grid_.size() >= 2 && grid_.size() == values_.size(), "PolyaConvex: need >= 2 matching nodes");
  require(grid_.front() == 0.0, "PolyaConvex: grid must start at 0");
  require(values_.front() == 1.0, "PolyaConvex: value at 0 must be 1");
  double prev_slope = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    require(grid_[i] > grid_[i - 1], "PolyaConvex: grid must be strictly increasing");
    require(values_[i] >= 0.0 && values_[i] <= values_[i - 1], "PolyaConvex: table must be nonincreasing and >= 0");
    const double slope = (values_[i] - values_[i - 1]) / (grid_[i] - grid_[i - 1]);
    require(slope >= prev_slope - 1e-12, "PolyaConvex: table is not convex");
    prev_slope = slope;
  }
}

double PolyaConvex::operator()(double t) const {
  const double a = std::abs(t);
  if (a >= grid_.back()) return values_.back();
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), a);
  const std::size_t i = static_cast<std::size_t>(it - grid_.begin());
  const double frac = (a - grid_[i - 1]) / (grid_[i] - grid_[i - 1]);
  return values_[i - 1] + frac * (values_[i] - values_[i - 1]);
}

double evaluate_component(const ProductComponent& c, double t) {
  return std::visit(Overloaded{
                        [t](const Triangle&) { return std::max(0.0, 1.0 - std::abs(t)); },
                        [t](const StretchedExp& s) { return std::exp(-std::pow(std::abs(t), s.q)); },
                        [t](const PolyaConvex& p) { return p(t); },
                    },
                    c);
}

ProductFunction::ProductFunction(std::vector<ProductComponent> components)
    : components_(std::move(components)) {
  require(!components_.empty(), "ProductFunction: no components");
  for (const auto& c : components_) {
    if (const auto* s = std::get_if<StretchedExp>(&c))
      require(s->q > 0.0 && s->q <= 2.0, "StretchedExp: q must lie in (0, 2]");
  }
}

double evaluate(const CosinePolynomial& f, std::span<const double> x) {
  require(x.size() == f.dim(), "evaluate: dimension mismatch");
  double s = 0.0;
  for (const auto& term : f.terms()) s += term.mass * std::cos(dot(term.frequency, x));
  return s;
}

double evaluate(const ProductFunction& f, std::span<const double> x) {
  require(x.size() == f.dim(), "evaluate: dimension mismatch");
  double p = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) p *= evaluate_component(f.components()[i], x[i]);
  return p;
}

double evaluate(const CappedQuadratic& f, std::span<const double> x) {
  require(x.size() == f.dim, "evaluate: dimension mismatch");
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::min(s, f.cap);
}

double evaluate(const CatalogFunction& f, std::span<const double> x) {
  return std::visit([x](const auto& g) { return evaluate(g, x); }, f);
}

std::size_t dimension(const CatalogFunction& f) {
  return std::visit(Overloaded{
                        [](const CosinePolynomial& g) { return g.dim(); },
                        [](const ProductFunction& g) { return g.dim(); },
                        [](const CappedQuadratic& g) { return g.dim; },
                    },
                    f);
}

bool is_positive_definite(const CatalogFunction& f) {
  return !std::holds_alternative<CappedQuadratic>(f);
}

std::string describe(const CatalogFunction& f) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const CosinePolynomial& g) { os << "cosine[" << g.terms().size() << " terms, dim " << g.dim() << "]"; },
                 [&](const ProductFunction& g) {
                   os << "product[";
                   for (std::size_t i = 0; i < g.dim(); ++i) {
                     if (i) os << ",";
                     std::visit(Overloaded{
                                    [&](const Triangle&) { os << "triangle"; },
                                    [&](const StretchedExp& s) { os << "stretched_exp(" << s.q << ")"; },
                                    [&](const PolyaConvex&) { os << "polya"; },
                                },
                                g.components()[i]);
                   }
                   os << "]";
                 },
                 [&](const CappedQuadratic& g) { os << "capped_quadratic[dim " << g.dim << ", cap " << g.cap << "]"; },
             },
             f);
  return os.str();
}

std::vector<MeasureAtom> representing_measure(const CosinePolynomial& f) {
  std::vector<MeasureAtom> atoms;
  atoms.reserve(2 * f.terms().size());
  for (const auto& term : f.terms()) {
    std::vector<double> neg(term.frequency);
    for (double& t : neg) t = -t;
    atoms.push_back({term.frequency, term.mass / 2.0});
    atoms.push_back({std::move(neg), term.mass / 2.0});
  }
  return atoms;
}

CosinePolynomial random_cosine_polynomial(RngStream& rng, std::size_t dim, std::size_t terms,
                                          double freq_scale) {
  require(terms >= 1, "random_cosine_polynomial: need at least one term");
  std::vector<CosineTerm> list(terms);
  for (auto& term : list) {
    term.mass = 1.0 - rng.uniform() * (1.0 - 0x1.0p-53);  // (0, 1]
    term.frequency.resize(dim);
    for (double& t : term.frequency) t = freq_scale * rng.normal();
  }
  return {dim, std::move(list)};
}

double bochner_density(const ProductComponent& c, double omega) {
  double support = 0.0;
  if (std::holds_alternative<Triangle>(c)) {
    support = 1.0;
  } else if (const auto* p = std::get_if<PolyaConvex>(&c)) {
    require(p->values().back() == 0.0, "bochner_density: table must reach 0 (compact support)");
    support = p->grid().back();
  } else {
    throw InvalidArgument("bochner_density: component is not compactly supported");
  }
  // Integrand is even: (1/pi) int_0^support c(t) cos(omega t) dt.
  const auto r = integrate([&](double t) { return evaluate_component(c, t) * std::cos(omega * t); },
                           0.0, support, 1e-12);
  return r.value / std::numbers::pi;
}

}  // namespace corrlab
