#include "corrlab/json_io.hpp"

#include <algorithm>
#include <cmath>

#include "corrlab/error.hpp"

namespace corrlab {
namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path.empty() ? "/" : path, message);
}

const Json& member(const Json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(path + "/" + key, "missing required field");
  return *it;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

std::size_t count(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    fail(path, "expected a non-negative integer");
  return j.get<std::size_t>();
}

std::vector<double> vector_of(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], path + "/" + std::to_string(i)));
  return v;
}

std::vector<std::vector<double>> matrix_of(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of arrays");
  std::vector<std::vector<double>> m;
  for (std::size_t i = 0; i < j.size(); ++i) m.push_back(vector_of(j[i], path + "/" + std::to_string(i)));
  return m;
}

/// Runs a constructor and rewraps InvalidArgument as a ConfigError at path.
template <class Fn>
auto build(const std::string& path, Fn fn) {
  try {
    return fn();
  } catch (const InvalidArgument& e) {
    fail(path, e.what());
  }
}

Json component_to_json(const ProductComponent& c) {
  if (std::holds_alternative<Triangle>(c)) return {{"kind", "triangle"}};
  if (const auto* s = std::get_if<StretchedExp>(&c)) return {{"kind", "stretched_exp"}, {"q", s->q}};
  const auto& p = std::get<PolyaConvex>(c);
  return {{"kind", "polya"}, {"grid", p.grid()}, {"values", p.values()}};
}

Json rows_to_json(const std::vector<std::vector<double>>& rows) {
  Json j = Json::array();
  for (const auto& r : rows) j.push_back(r);
  return j;
}

}  // namespace

void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) fail(path + "/" + key, "unknown field");
  }
}

StepFunction step_function_from_json(const Json& j, const std::string& path) {
  check_keys(j, path, {"weights", "values"});
  auto w = vector_of(member(j, path, "weights"), path + "/weights");
  auto v = vector_of(member(j, path, "values"), path + "/values");
  return build(path, [&] { return StepFunction(std::move(w), std::move(v)); });
}

StableModel stable_model_from_json(const Json& j, const std::string& path) {
  check_keys(j, path, {"q", "atoms"});
  const double q = number(member(j, path, "q"), path + "/q");
  const auto& atoms_json = member(j, path, "atoms");
  if (!atoms_json.is_array()) fail(path + "/atoms", "expected an array");
  std::vector<SpectralAtom> atoms;
  for (std::size_t i = 0; i < atoms_json.size(); ++i) {
    const std::string p = path + "/atoms/" + std::to_string(i);
    check_keys(atoms_json[i], p, {"w", "v"});
    atoms.push_back({number(member(atoms_json[i], p, "w"), p + "/w"), vector_of(member(atoms_json[i], p, "v"), p + "/v")});
  }
  return build(path, [&] { return StableModel(q, std::move(atoms)); });
}

Functionals functionals_from_json(const Json& j, const std::string& path) {
  check_keys(j, path, {"xi"});
  auto rows = matrix_of(member(j, path, "xi"), path + "/xi");
  return build(path, [&] { return Functionals(std::move(rows)); });
}

CatalogFunction catalog_function_from_json(const Json& j, const std::string& path) {
  const auto& type = member(j, path, "type");
  if (!type.is_string()) fail(path + "/type", "expected a string");
  const auto t = type.get<std::string>();
  if (t == "cosine") {
    check_keys(j, path, {"type", "dim", "terms"});
    const std::size_t dim = count(member(j, path, "dim"), path + "/dim");
    const auto& terms_json = member(j, path, "terms");
    if (!terms_json.is_array()) fail(path + "/terms", "expected an array");
    std::vector<CosineTerm> terms;
    for (std::size_t i = 0; i < terms_json.size(); ++i) {
      const std::string p = path + "/terms/" + std::to_string(i);
      check_keys(terms_json[i], p, {"mass", "frequency"});
      terms.push_back({number(member(terms_json[i], p, "mass"), p + "/mass"),
                       vector_of(member(terms_json[i], p, "frequency"), p + "/frequency")});
    }
    return build(path, [&] { return CatalogFunction(CosinePolynomial(dim, std::move(terms))); });
  }
  if (t == "product") {
    check_keys(j, path, {"type", "components"});
    const auto& comps = member(j, path, "components");
    if (!comps.is_array()) fail(path + "/components", "expected an array");
    std::vector<ProductComponent> list;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const std::string p = path + "/components/" + std::to_string(i);
      const auto& kind_json = member(comps[i], p, "kind");
      if (!kind_json.is_string()) fail(p + "/kind", "expected a string");
      const auto kind = kind_json.get<std::string>();
      if (kind == "triangle") {
        check_keys(comps[i], p, {"kind"});
        list.emplace_back(Triangle{});
      } else if (kind == "stretched_exp") {
        check_keys(comps[i], p, {"kind", "q"});
        const double q = number(member(comps[i], p, "q"), p + "/q");
        if (!(q > 0.0 && q <= 2.0)) fail(p + "/q", "q must lie in (0, 2]");
        list.emplace_back(StretchedExp{q});
      } else if (kind == "polya") {
        check_keys(comps[i], p, {"kind", "grid", "values"});
        auto grid = vector_of(member(comps[i], p, "grid"), p + "/grid");
        auto values = vector_of(member(comps[i], p, "values"), p + "/values");
        list.emplace_back(build(p, [&] { return PolyaConvex(std::move(grid), std::move(values)); }));
      } else {
        fail(p + "/kind", "unknown component kind '" + kind + "'");
      }
    }
    return build(path, [&] { return CatalogFunction(ProductFunction(std::move(list))); });
  }
  if (t == "capped_quadratic") {
    check_keys(j, path, {"type", "dim", "cap"});
    CappedQuadratic c{count(member(j, path, "dim"), path + "/dim"), number(member(j, path, "cap"), path + "/cap")};
    if (c.dim == 0) fail(path + "/dim", "must be >= 1");
    if (!(c.cap > 0.0)) fail(path + "/cap", "must be > 0");
    return c;
  }
  fail(path + "/type", "unknown function type '" + t + "'");
}

ConvexBody body_from_json(const Json& j, const std::string& path) {
  const auto& kind_json = member(j, path, "kind");
  if (!kind_json.is_string()) fail(path + "/kind", "expected a string");
  const auto kind = kind_json.get<std::string>();
  if (kind == "box") {
    check_keys(j, path, {"kind", "half_widths"});
    auto hw = vector_of(member(j, path, "half_widths"), path + "/half_widths");
    return build(path, [&] { return ConvexBody::box(std::move(hw)); });
  }
  if (kind == "ellipsoid") {
    check_keys(j, path, {"kind", "matrix"});
    auto m = sym_matrix_from_json(member(j, path, "matrix"), path + "/matrix");
    return build(path, [&] { return ConvexBody::ellipsoid(std::move(m)); });
  }
  if (kind == "slabs") {
    check_keys(j, path, {"kind", "normals"});
    auto normals = matrix_of(member(j, path, "normals"), path + "/normals");
    return build(path, [&] { return ConvexBody::slabs(std::move(normals)); });
  }
  fail(path + "/kind", "unknown body kind '" + kind + "'");
}

SymMatrix sym_matrix_from_json(const Json& j, const std::string& path) {
  auto rows = matrix_of(j, path);
  return build(path, [&] { return SymMatrix::from_rows(rows); });
}

Json to_json(const StepFunction& f) { return {{"weights", f.weights()}, {"values", f.values()}}; }

Json to_json(const StableModel& m) {
  Json atoms = Json::array();
  for (const auto& a : m.atoms()) atoms.push_back({{"w", a.weight}, {"v", a.vector}});
  return {{"q", m.q()}, {"atoms", atoms}};
}

Json to_json(const Functionals& xi) { return {{"xi", rows_to_json(xi.vectors())}}; }

Json to_json(const CatalogFunction& f) {
  if (const auto* c = std::get_if<CosinePolynomial>(&f)) {
    Json terms = Json::array();
    for (const auto& t : c->terms()) terms.push_back({{"mass", t.mass}, {"frequency", t.frequency}});
    return {{"type", "cosine"}, {"dim", c->dim()}, {"terms", terms}};
  }
  if (const auto* p = std::get_if<ProductFunction>(&f)) {
    Json comps = Json::array();
    for (const auto& c : p->components()) comps.push_back(component_to_json(c));
    return {{"type", "product"}, {"components", comps}};
  }
  const auto& q = std::get<CappedQuadratic>(f);
  return {{"type", "capped_quadratic"}, {"dim", q.dim}, {"cap", q.cap}};
}

Json to_json(const ConvexBody& b) {
  if (const auto* box = std::get_if<Box>(&b.shape())) return {{"kind", "box"}, {"half_widths", box->half_widths}};
  if (const auto* e = std::get_if<Ellipsoid>(&b.shape())) return {{"kind", "ellipsoid"}, {"matrix", to_json(e->shape)}};
  return {{"kind", "slabs"}, {"normals", rows_to_json(std::get<SlabPolytope>(b.shape()).normals)}};
}

Json to_json(const SymMatrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.dim(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

Json to_json(const McEstimate& e) {
  return {{"mean", e.mean}, {"std_error", e.std_error}, {"n_samples", e.n_samples}};
}

Json to_json(const GapReport& r) {
  return {{"fixture_id", r.fixture_id}, {"method", to_string(r.method)}, {"split", r.split},
          {"seed", r.seed},             {"e_fg", to_json(r.e_fg)},      {"e_f", to_json(r.e_f)},
          {"e_g", to_json(r.e_g)},      {"gap", to_json(r.gap)},        {"threshold", r.threshold},
          {"positive_definite", r.positive_definite}, {"pass", r.pass}};
}

Json to_json(const CurvatureEstimate& c) {
  Json j = {{"value", to_json(c.value)},
            {"std_error", to_json(c.std_error)},
            {"eigenvalues", c.eigenvalues},
            {"eigenvalue_std_errors", c.eigenvalue_std_errors},
            {"negative_definite", c.negative_definite},
            {"matches_closed_form", c.matches_closed_form},
            {"max_closed_form_z", c.max_closed_form_z}};
  if (c.closed_form) {
    j["closed_form"] = to_json(*c.closed_form);
    j["closed_form_eigenvalues"] = *c.closed_form_eigenvalues;
  }
  return j;
}

Json to_json(const HessianReport& r) {
  return {{"k", r.k},
          {"prefactor", r.prefactor},
          {"hessian_form", "H[(i,j),(m,n)] = prefactor * L[i][m] * K[j][n]"},
          {"L", to_json(r.l)},
          {"K", to_json(r.k_block)},
          {"local_minimum_consistent", r.local_minimum_consistent}};
}

Json to_json(const FdReport& r) {
  Json grad = Json::array();
  for (const auto& g : r.gradient) grad.push_back(to_json(g));
  return {{"k", r.k},
          {"step", r.step},
          {"gradient", grad},
          {"hessian", to_json(r.hessian)},
          {"hessian_std_error", to_json(r.hessian_std_error)},
          {"analytic_diagonal", r.analytic_diagonal},
          {"diagonal_z", r.diagonal_z},
          {"gradient_vanishes", r.gradient_vanishes},
          {"diagonal_positive", r.diagonal_positive}};
}

Json to_json(const MarginalReport& r) {
  Json pts = Json::array();
  for (const auto& p : r.points) pts.push_back({{"x", p.x}, {"phi", to_json(p.phi)}});
  return {{"points", pts}, {"even", r.even}, {"monotone", r.monotone}, {"log_concave", r.log_concave}};
}

Json to_json(const LambdaLimitReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) rows.push_back({{"lambda", row.lambda}, {"mu", to_json(row.mu)}});
  Json j = {{"rows", rows},
            {"nu_f", to_json(r.nu_f)},
            {"nu_g", to_json(r.nu_g)},
            {"nu_intersection", to_json(r.nu_intersection)},
            {"nu_product", to_json(r.nu_product)},
            {"limit_gap", r.limit_gap},
            {"limit_se", r.limit_se},
            {"limit_ok", r.limit_ok},
            {"factorization_ok", r.factorization_ok}};
  if (r.factorization_gap) {
    j["factorization_gap"] = *r.factorization_gap;
    j["factorization_se"] = *r.factorization_se;
  }
  if (r.sqrt_extrapolated_limit) j["sqrt_extrapolated_limit"] = *r.sqrt_extrapolated_limit;
  return j;
}

Json to_json(const ProbeReport& r) {
  Json runs = Json::array();
  for (const auto& run : r.restarts) {
    Json traj = Json::array();
    for (const auto& b : run.trajectory) traj.push_back(to_json(b));
    runs.push_back({{"start", to_json(run.start)},
                    {"argmin", to_json(run.argmin)},
                    {"mu", to_json(run.mu)},
                    {"margin", run.margin},
                    {"margin_se", run.margin_se},
                    {"trajectory", traj}});
  }
  return {{"mu_zero", to_json(r.mu_zero)},
          {"restarts", runs},
          {"best", r.best},
          {"min_estimate", to_json(r.restarts.at(r.best).mu)},
          {"argmin", to_json(r.restarts.at(r.best).argmin)},
          {"candidate_violation", r.candidate_violation},
          {"verdict", r.verdict}};
}

}  // namespace corrlab
