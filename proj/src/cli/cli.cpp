#include "corrlab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "corrlab/correlation.hpp"
#include "corrlab/error.hpp"
#include "corrlab/fixtures.hpp"
#include "corrlab/gaussian_correlation.hpp"
#include "corrlab/lq_geometry.hpp"
#include "corrlab/parallel.hpp"
#include "corrlab/special.hpp"

namespace corrlab::cli {
namespace {

struct Check {
  std::string name;
  bool passed = true;
  Json detail = Json::object();
  /// Probes are reported but never fail the run.
  bool probe = false;
};

struct Outcome {
  Json results = Json::object();
  std::vector<Check> checks;
  std::string csv_header;
  std::vector<std::string> csv_rows;
};

const std::vector<std::string> kCommonKeys = {"experiment", "seed", "samples", "workers", "out", "tolerance"};

const std::map<std::string, std::vector<std::string>>& specific_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"lemma1", {"trials"}},
      {"theorem1-exact", {"trials", "q_values", "model", "functionals", "split", "f", "g"}},
      {"theorem1-mc", {"model", "functionals", "split", "f", "g"}},
      {"hessian", {"F", "G"}},
      {"fd-check", {"F", "G", "step"}},
      {"lambda-limit", {"F", "G", "lambdas"}},
      {"marginal", {"F", "grid", "grid_half_width"}},
      {"pitt2d", {"grid", "half_width", "rho_max"}},
      {"probe-min", {"F", "G", "A", "C", "steps", "restarts", "final_samples", "fd_step", "learning_rate"}},
  };
  return keys;
}

Json unit_box_json(std::size_t k) { return {{"kind", "box"}, {"half_widths", std::vector<double>(k, 1.0)}}; }

Json defaults_for(const std::string& e) {
  Json d = {{"experiment", e}, {"seed", 1}, {"workers", 0}, {"out", "."}};
  if (e == "lemma1") {
    d.update({{"trials", 10000}, {"tolerance", 1e-12}, {"samples", 0}});
  } else if (e == "theorem1-exact") {
    d.update({{"trials", 1000}, {"q_values", {0.5, 1.0, 1.5, 2.0}}, {"tolerance", 1e-10}, {"samples", 0}});
  } else if (e == "theorem1-mc") {
    d.update({{"samples", 100000}, {"tolerance", 3.0}});
  } else if (e == "hessian") {
    d.update({{"samples", 1000000}, {"tolerance", 3.0}, {"F", unit_box_json(2)}, {"G", unit_box_json(2)}});
  } else if (e == "fd-check") {
    d.update({{"samples", 1000000}, {"tolerance", 3.0}, {"F", unit_box_json(1)}, {"G", unit_box_json(1)},
              {"step", 1e-2}});
  } else if (e == "lambda-limit") {
    d.update({{"samples", 1000000}, {"tolerance", 3.0}, {"F", unit_box_json(2)}, {"G", unit_box_json(2)},
              {"lambdas", {0.0, 0.5, 0.9, 0.99}}});
  } else if (e == "marginal") {
    d.update({{"samples", 1000000},
              {"tolerance", 3.0},
              {"F", {{"kind", "ellipsoid"}, {"matrix", {{1.0, 0.0}, {0.0, 1.0}}}}},
              {"grid", 21},
              {"grid_half_width", 1.0}});
  } else if (e == "pitt2d") {
    d.update({{"samples", 0}, {"tolerance", 1e-10}, {"grid", 41}, {"half_width", 1.0}, {"rho_max", 0.98}});
  } else if (e == "probe-min") {
    const ProbeOptions o;
    d.update({{"samples", o.samples},
              {"tolerance", 3.0},
              {"F", unit_box_json(1)},
              {"G", unit_box_json(1)},
              {"steps", o.steps},
              {"restarts", o.restarts},
              {"final_samples", o.final_samples},
              {"fd_step", o.fd_step},
              {"learning_rate", o.learning_rate}});
  }
  return d;
}

// Typed accessors over the effective config; errors name the field.

const Json& field(const Json& cfg, const std::string& key) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) throw ConfigError("/" + key, "missing required field");
  return *it;
}

std::uint64_t get_u64(const Json& cfg, const std::string& key) {
  const auto& v = field(cfg, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw ConfigError("/" + key, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::size_t get_count(const Json& cfg, const std::string& key, std::size_t min_value = 0) {
  const auto v = get_u64(cfg, key);
  if (v < min_value) throw ConfigError("/" + key, "must be >= " + std::to_string(min_value));
  return static_cast<std::size_t>(v);
}

double get_real(const Json& cfg, const std::string& key) {
  const auto& v = field(cfg, key);
  if (!v.is_number() || !std::isfinite(v.get<double>())) throw ConfigError("/" + key, "expected a finite number");
  return v.get<double>();
}

std::vector<double> get_reals(const Json& cfg, const std::string& key) {
  const auto& v = field(cfg, key);
  if (!v.is_array()) throw ConfigError("/" + key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError("/" + key + "/" + std::to_string(i), "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

Execution get_exec(const Json& cfg) {
  const auto& v = field(cfg, "workers");
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("/workers", "expected an integer >= 0");
  return {static_cast<int>(v.get<long long>())};
}

RngStream root_stream(const Json& cfg) { return RngStream(get_u64(cfg, "seed"), 0); }

ConvexBody get_body(const Json& cfg, const std::string& key) { return body_from_json(field(cfg, key), "/" + key); }

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

template <class Fn>
auto wrap_invalid(const std::string& path, Fn fn) {
  try {
    return fn();
  } catch (const InvalidArgument& e) {
    throw ConfigError(path, e.what());
  }
}

//---------------------------------------------------------------------------//
// Experiments
//---------------------------------------------------------------------------//

Outcome run_lemma1(const Json& cfg) {
  const std::size_t trials = get_count(cfg, "trials", 1);
  const std::uint64_t seed = get_u64(cfg, "seed");
  const double tol = get_real(cfg, "tolerance");
  struct Trial {
    double q, clarkson, lemma1, amgm, q2_clarkson;
    std::size_t pieces;
  };
  std::vector<Trial> rows(trials);
  parallel_for(
      trials,
      [&](std::size_t t) {
        RngStream rng(seed, t);
        const std::size_t pieces = 1 + static_cast<std::size_t>(8.0 * rng.uniform());
        const auto w = random_partition(rng, pieces);
        const auto xi = random_step_function(rng, w);
        const auto eta = random_step_function(rng, w);
        const double q = 2.0 * (1.0 - rng.uniform() * (1.0 - 0x1.0p-53));
        const double a = lq_qnorm(xi, q);
        const double b = lq_qnorm(eta, q);
        rows[t] = {q,
                   clarkson_orlicz_gap(xi, eta, q),
                   lemma1_gap(xi, eta, q),
                   std::exp(-a) + std::exp(-b) - 2.0 * std::exp(-0.5 * (a + b)),
                   clarkson_orlicz_gap(xi, eta, 2.0),
                   pieces};
      },
      get_exec(cfg));

  Outcome o;
  o.csv_header = "trial,q,pieces,clarkson_orlicz_gap,lemma1_gap,pass";
  double min_c = INFINITY, min_l = INFINITY, min_a = INFINITY, max_q2 = 0.0;
  Json failures = Json::array();
  for (std::size_t t = 0; t < trials; ++t) {
    const auto& r = rows[t];
    const bool pass = r.clarkson >= -tol && r.lemma1 >= -tol && r.amgm >= -tol && std::abs(r.q2_clarkson) <= tol;
    min_c = std::min(min_c, r.clarkson);
    min_l = std::min(min_l, r.lemma1);
    min_a = std::min(min_a, r.amgm);
    max_q2 = std::max(max_q2, std::abs(r.q2_clarkson));
    if (!pass && failures.size() < 20) failures.push_back({{"trial", t}, {"stream_index", t}, {"q", r.q}});
    o.csv_rows.push_back(std::to_string(t) + "," + fmt(r.q) + "," + std::to_string(r.pieces) + "," +
                         fmt(r.clarkson) + "," + fmt(r.lemma1) + "," + (pass ? "true" : "false"));
  }
  o.results = {{"trials", trials},
               {"min_clarkson_orlicz_gap", min_c},
               {"min_lemma1_gap", min_l},
               {"min_amgm_gap", min_a},
               {"max_abs_q2_clarkson_gap", max_q2},
               {"failing_trials", failures}};
  o.checks = {{"clarkson_orlicz_gap >= -tol", min_c >= -tol, {{"min", min_c}, {"tol", tol}}},
              {"lemma1_gap >= -tol", min_l >= -tol, {{"min", min_l}, {"tol", tol}}},
              {"amgm_gap >= -tol", min_a >= -tol, {{"min", min_a}, {"tol", tol}}},
              {"q=2 parallelogram law", max_q2 <= tol, {{"max_abs", max_q2}, {"tol", tol}}}};
  return o;
}

struct ConfigFixture {
  StableModel model;
  Functionals xi;
  std::size_t split;
  CatalogFunction f;
  CatalogFunction g;
};

std::optional<ConfigFixture> config_fixture(const Json& cfg) {
  if (!cfg.contains("model")) {
    for (const char* key : {"functionals", "split", "f", "g"})
      if (cfg.contains(key)) throw ConfigError(std::string("/") + key, "requires /model");
    return std::nullopt;
  }
  return ConfigFixture{stable_model_from_json(field(cfg, "model"), "/model"),
                       functionals_from_json(field(cfg, "functionals"), "/functionals"),
                       get_count(cfg, "split", 1), catalog_function_from_json(field(cfg, "f"), "/f"),
                       catalog_function_from_json(field(cfg, "g"), "/g")};
}

Outcome run_theorem1_exact(const Json& cfg) {
  const double tol = get_real(cfg, "tolerance");
  struct Item {
    std::string id;
    GapReport report;
    SymmetryPair sym;
  };
  std::vector<Item> items;
  auto evaluate_fixture = [&](std::string id, const StableModel& model, const Functionals& xi, std::size_t split,
                              const CosinePolynomial& f, const CosinePolynomial& g) {
    Item it{std::move(id), correlation_gap_exact(model, xi, split, f, g), i1_i2_symmetry(model, xi, split, f, g)};
    it.report.threshold = -tol * f.at_origin() * g.at_origin();
    it.report.pass = it.report.gap.mean >= it.report.threshold;
    it.report.fixture_id = it.id;
    return it;
  };

  if (auto fx = config_fixture(cfg)) {
    const auto* f = std::get_if<CosinePolynomial>(&fx->f);
    const auto* g = std::get_if<CosinePolynomial>(&fx->g);
    if (!f) throw ConfigError("/f", "theorem1-exact requires a cosine polynomial");
    if (!g) throw ConfigError("/g", "theorem1-exact requires a cosine polynomial");
    items.push_back(wrap_invalid("/", [&] { return evaluate_fixture("config", fx->model, fx->xi, fx->split, *f, *g); }));
  } else {
    const std::size_t trials = get_count(cfg, "trials", 1);
    const auto qs = get_reals(cfg, "q_values");
    for (std::size_t i = 0; i < qs.size(); ++i)
      if (!(qs[i] > 0.0 && qs[i] <= 2.0)) throw ConfigError("/q_values/" + std::to_string(i), "q must lie in (0, 2]");
    items.resize(qs.size() * trials, Item{"", {}, {}});
    const std::uint64_t seed = get_u64(cfg, "seed");
    parallel_for(
        items.size(),
        [&](std::size_t idx) {
          const std::size_t qi = idx / trials;
          const std::size_t t = idx % trials;
          RngStream rng(seed, (static_cast<std::uint64_t>(qi) << 32) | t);
          auto fx = random_gap_fixture(rng, qs[qi]);
          items[idx] = evaluate_fixture("q=" + fmt(qs[qi]) + "#" + std::to_string(t), fx.model, fx.xi, fx.split,
                                        fx.f, fx.g);
        },
        get_exec(cfg));
  }

  Outcome o;
  o.csv_header = csv_header();
  double min_rel_gap = INFINITY;
  double max_sym = 0.0;
  bool gap_ok = true;
  Json failures = Json::array();
  for (const auto& it : items) {
    const double sym = std::abs(it.sym.plus - it.sym.minus) / std::max(std::abs(it.sym.plus), 1e-300);
    max_sym = std::max(max_sym, sym);
    min_rel_gap = std::min(min_rel_gap, it.report.gap.mean / (-it.report.threshold / tol));
    gap_ok = gap_ok && it.report.pass;
    if (!it.report.pass && failures.size() < 20) failures.push_back(to_json(it.report));
    o.csv_rows.push_back(csv_row(it.report));
  }
  o.results = {{"fixtures", items.size()},
               {"min_gap_over_f0g0", min_rel_gap},
               {"max_relative_i1_i2_difference", max_sym},
               {"failing_fixtures", failures}};
  if (items.size() == 1) o.results["report"] = to_json(items.front().report);
  o.checks = {{"gap >= -tol f(0) g(0)", gap_ok, {{"min_gap_over_f0g0", min_rel_gap}, {"tol", tol}}},
              {"I1 = I2 to 1e-12", max_sym <= 1e-12, {{"max_relative_difference", max_sym}}}};
  return o;
}

Outcome run_theorem1_mc(const Json& cfg) {
  const std::size_t n = get_count(cfg, "samples", 1000);
  const double z = get_real(cfg, "tolerance");
  const std::uint64_t seed = get_u64(cfg, "seed");
  std::vector<McFixture> fixtures;
  if (auto fx = config_fixture(cfg)) {
    fixtures.push_back({"config", std::move(fx->model), std::move(fx->xi), fx->split, std::move(fx->f), std::move(fx->g)});
  } else {
    fixtures = triangle_product_fixtures(5);
    for (auto& f : stretched_exp_fixtures(5)) fixtures.push_back(std::move(f));
  }

  Outcome o;
  o.csv_header = csv_header();
  Json reports = Json::array();
  bool pd_ok = true;
  bool probe_ok = true;
  bool exact_ok = true;
  bool any_exact = false;
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const auto& fx = fixtures[i];
    auto r = wrap_invalid("/", [&] {
      return correlation_gap_mc(fx.model, fx.xi, fx.split, fx.f, fx.g, n, RngStream(seed, i), get_exec(cfg));
    });
    r.fixture_id = fx.id;
    r.threshold = -z * r.gap.std_error;
    r.pass = r.gap.mean >= r.threshold;
    Json j = to_json(r);
    (r.positive_definite ? pd_ok : probe_ok) &= r.pass;
    const auto* f = std::get_if<CosinePolynomial>(&fx.f);
    const auto* g = std::get_if<CosinePolynomial>(&fx.g);
    if (f && g) {
      any_exact = true;
      const auto exact = correlation_gap_exact(fx.model, fx.xi, fx.split, *f, *g);
      const bool agree = std::abs(exact.gap.mean - r.gap.mean) <= z * r.gap.std_error;
      exact_ok = exact_ok && agree;
      j["exact_gap"] = exact.gap.mean;
      j["exact_agrees"] = agree;
    }
    reports.push_back(j);
    o.csv_rows.push_back(csv_row(r));
  }
  o.results = {{"reports", reports}};
  o.checks.push_back({"gap >= -z SE (positive definite f, g)", pd_ok, {{"z", z}}});
  o.checks.push_back({"gap >= -z SE (non positive definite probe)", probe_ok, {{"z", z}}, true});
  if (any_exact) o.checks.push_back({"|exact - mc| <= z SE", exact_ok, {{"z", z}}});
  return o;
}

Outcome run_hessian(const Json& cfg) {
  const auto f = get_body(cfg, "F");
  const auto g = get_body(cfg, "G");
  const double z = get_real(cfg, "tolerance");
  const auto r = wrap_invalid("/", [&] {
    return hessian_at_zero(f, g, get_count(cfg, "samples", 2), root_stream(cfg), get_exec(cfg));
  });
  Outcome o;
  o.results = to_json(r);
  o.csv_header = "block,i,m,value,se,closed_form";
  auto emit = [&](const char* name, const CurvatureEstimate& c) {
    bool neg = true;
    for (std::size_t e = 0; e < c.eigenvalues.size(); ++e) neg = neg && c.eigenvalues[e] < -z * c.eigenvalue_std_errors[e];
    if (c.closed_form_eigenvalues)
      for (double ev : *c.closed_form_eigenvalues) neg = neg && ev < 0.0;
    o.checks.push_back({std::string(name) + " negative definite (eigenvalues < -z SE)", neg,
                        {{"eigenvalues", c.eigenvalues}, {"std_errors", c.eigenvalue_std_errors}}});
    if (c.closed_form)
      o.checks.push_back({std::string(name) + " matches closed form within z SE", c.max_closed_form_z <= z,
                          {{"max_z", c.max_closed_form_z}}});
    for (std::size_t i = 0; i < c.value.dim(); ++i)
      for (std::size_t m = 0; m <= i; ++m)
        o.csv_rows.push_back(std::string(name) + "," + std::to_string(i) + "," + std::to_string(m) + "," +
                             fmt(c.value(i, m)) + "," + fmt(c.std_error(i, m)) + "," +
                             (c.closed_form ? fmt((*c.closed_form)(i, m)) : std::string()));
  };
  emit("L", r.l);
  emit("K", r.k_block);
  return o;
}

Outcome run_fd_check(const Json& cfg) {
  const auto f = get_body(cfg, "F");
  const auto g = get_body(cfg, "G");
  const double z = get_real(cfg, "tolerance");
  const double step = get_real(cfg, "step");
  const auto r = wrap_invalid("/", [&] {
    return hessian_fd(f, g, step, get_count(cfg, "samples", 2), root_stream(cfg), get_exec(cfg));
  });
  Outcome o;
  o.results = to_json(r);
  bool grad_ok = true;
  for (const auto& e : r.gradient) grad_ok = grad_ok && std::abs(e.mean) <= z * e.std_error;
  o.checks.push_back({"FD gradient at B=0 within z SE of 0", grad_ok, {{"z", z}}});
  o.checks.push_back({"FD diagonal second differences positive", r.diagonal_positive, Json::object(), true});

  const auto* bf = std::get_if<Box>(&f.shape());
  const auto* bg = std::get_if<Box>(&g.shape());
  if (f.dim() == 1 && bf && bg && bf->half_widths == bg->half_widths) {
    const double a = bf->half_widths[0];
    const double second = box_oracle_second_difference(a, 1e-3);
    const double expected = theta(a) * theta(a) / (2.0 * std::numbers::pi);
    o.results["oracle"] = {{"second_difference", second}, {"kronecker_value", expected}, {"step", 1e-3}};
    o.checks.push_back({"oracle second difference = theta(a)^2 / (2 pi) within 1e-6",
                        std::abs(second - expected) <= 1e-6 && second > 0.0,
                        {{"second_difference", second}, {"expected", expected}}});
  }
  o.csv_header = "coordinate,gradient,gradient_se,hessian_diag,hessian_diag_se,analytic_diag";
  for (std::size_t a = 0; a < r.gradient.size(); ++a)
    o.csv_rows.push_back(std::to_string(a) + "," + fmt(r.gradient[a].mean) + "," + fmt(r.gradient[a].std_error) +
                         "," + fmt(r.hessian(a, a)) + "," + fmt(r.hessian_std_error(a, a)) + "," +
                         (a < r.analytic_diagonal.size() ? fmt(r.analytic_diagonal[a]) : std::string()));
  return o;
}

Outcome run_lambda_limit(const Json& cfg) {
  const auto f = get_body(cfg, "F");
  const auto g = get_body(cfg, "G");
  const double z = get_real(cfg, "tolerance");
  const auto lambdas = get_reals(cfg, "lambdas");
  const auto r = wrap_invalid("/", [&] {
    return lambda_limit(f, g, lambdas, get_count(cfg, "samples", 2), root_stream(cfg), get_exec(cfg));
  });
  Outcome o;
  o.results = to_json(r);
  o.checks.push_back({"|mu(lambda_max) - nu(F cap G)| <= z combined SE", r.limit_gap <= z * r.limit_se,
                      {{"gap", r.limit_gap}, {"se", r.limit_se}, {"lambda_max", r.rows.back().lambda}}});
  if (r.factorization_gap)
    o.checks.push_back({"mu(0) = nu(F) nu(G) within z SE", *r.factorization_gap <= z * *r.factorization_se,
                        {{"gap", *r.factorization_gap}, {"se", *r.factorization_se}}});
  o.csv_header = "lambda,estimate,se";
  for (const auto& row : r.rows) o.csv_rows.push_back(fmt(row.lambda) + "," + fmt(row.mu.mean) + "," + fmt(row.mu.std_error));
  return o;
}

Outcome run_marginal(const Json& cfg) {
  const auto f = get_body(cfg, "F");
  const double z = get_real(cfg, "tolerance");
  const auto grid = symmetric_grid(get_real(cfg, "grid_half_width"), get_count(cfg, "grid", 3));
  const auto r = wrap_invalid("/", [&] {
    return marginal_phi(f, grid, get_count(cfg, "samples", 2), root_stream(cfg), get_exec(cfg), z);
  });
  Outcome o;
  o.results = to_json(r);
  o.checks = {{"phi even", r.even}, {"phi decreasing in |x1|", r.monotone}, {"phi discretely log-concave", r.log_concave}};
  o.csv_header = "x,phi,se";
  for (const auto& p : r.points) o.csv_rows.push_back(fmt(p.x) + "," + fmt(p.phi.mean) + "," + fmt(p.phi.std_error));
  return o;
}

Outcome run_pitt2d(const Json& cfg) {
  const std::size_t n = get_count(cfg, "grid", 2);
  const double a = get_real(cfg, "half_width");
  const double rho_max = get_real(cfg, "rho_max");
  const double tol = get_real(cfg, "tolerance");
  if (!(a > 0.0)) throw ConfigError("/half_width", "must be > 0");
  if (!(rho_max > 0.0 && rho_max < 1.0)) throw ConfigError("/rho_max", "must lie in (0, 1)");
  const auto rhos = symmetric_grid(rho_max, n);
  const double indep = std::pow(2.0 * normal_cdf(a) - 1.0, 2);
  Outcome o;
  o.csv_header = "rho,P,P_indep,margin";
  double min_margin = INFINITY;
  double argmin = 0.0;
  for (double rho : rhos) {
    const double p = box_probability_2d(rho, a);
    const double margin = p - indep;
    if (margin < min_margin) {
      min_margin = margin;
      argmin = rho;
    }
    o.csv_rows.push_back(fmt(rho) + "," + fmt(p) + "," + fmt(indep) + "," + fmt(margin));
  }
  o.results = {{"grid", n}, {"half_width", a}, {"independent_value", indep}, {"min_margin", min_margin}, {"argmin_rho", argmin}};
  o.checks = {{"P(rho) - P(0 indep) >= -tol on the grid", min_margin >= -tol, {{"min", min_margin}, {"tol", tol}}}};
  if (n % 2 == 1)
    o.checks.push_back({"grid minimum attained at rho = 0", argmin == 0.0, {{"argmin_rho", argmin}}});
  return o;
}

Outcome run_probe_min(const Json& cfg) {
  const auto f = get_body(cfg, "F");
  const auto g = get_body(cfg, "G");
  const double z = get_real(cfg, "tolerance");
  const std::size_t k = f.dim();
  const SymMatrix a = cfg.contains("A") ? sym_matrix_from_json(cfg["A"], "/A") : SymMatrix::identity(k);
  const SymMatrix c = cfg.contains("C") ? sym_matrix_from_json(cfg["C"], "/C") : SymMatrix::identity(k);
  ProbeOptions opt;
  opt.steps = get_count(cfg, "steps", 2);
  opt.restarts = get_count(cfg, "restarts", 1);
  opt.samples = get_count(cfg, "samples", 2);
  opt.final_samples = get_count(cfg, "final_samples", 2);
  opt.fd_step = get_real(cfg, "fd_step");
  opt.learning_rate = get_real(cfg, "learning_rate");
  const auto r = wrap_invalid("/", [&] { return probe_minimum(f, g, a, c, opt, root_stream(cfg), get_exec(cfg)); });
  Outcome o;
  o.results = to_json(r);
  bool ok = true;
  for (const auto& run : r.restarts) ok = ok && run.margin >= -z * run.margin_se;
  o.checks.push_back({"no candidate violation (margin >= -z SE)", ok, {{"verdict", r.verdict}}});
  o.csv_header = "restart,step,b";
  for (std::size_t i = 0; i < r.restarts.size(); ++i)
    for (std::size_t t = 0; t < r.restarts[i].trajectory.size(); ++t) {
      std::string b;
      for (double v : r.restarts[i].trajectory[t].data()) b += (b.empty() ? "" : ";") + fmt(v);
      o.csv_rows.push_back(std::to_string(i) + "," + std::to_string(t) + "," + b);
    }
  return o;
}

Outcome dispatch(const std::string& e, const Json& cfg) {
  if (e == "lemma1") return run_lemma1(cfg);
  if (e == "theorem1-exact") return run_theorem1_exact(cfg);
  if (e == "theorem1-mc") return run_theorem1_mc(cfg);
  if (e == "hessian") return run_hessian(cfg);
  if (e == "fd-check") return run_fd_check(cfg);
  if (e == "lambda-limit") return run_lambda_limit(cfg);
  if (e == "marginal") return run_marginal(cfg);
  if (e == "pitt2d") return run_pitt2d(cfg);
  if (e == "probe-min") return run_probe_min(cfg);
  throw ConfigError("/experiment", "unknown experiment '" + e + "'");
}

std::string csv_name(const std::string& e) { return e + ".csv"; }

Json load_json_file(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(what, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(what, std::string("invalid JSON: ") + e.what());
  }
}

void write_outputs(const std::string& experiment, const Json& report, const Outcome* outcome) {
  const std::filesystem::path dir = report["config"]["out"].get<std::string>();
  std::filesystem::create_directories(dir);
  std::ofstream(dir / (experiment + ".json")) << report.dump(2) << '\n';
  if (outcome && !outcome->csv_header.empty()) {
    std::ofstream csv(dir / csv_name(experiment));
    csv << outcome->csv_header << '\n';
    for (const auto& row : outcome->csv_rows) csv << row << '\n';
  }
}

Json build_report(const std::string& experiment, const Json& cfg, Outcome& outcome) {
  Json checks = Json::array();
  bool passed = true;
  for (const auto& c : outcome.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"probe", c.probe}, {"detail", c.detail}});
    if (!c.probe) passed = passed && c.passed;
  }
  const auto hash = hex(config_hash(cfg));
  Json report = {{"experiment", experiment},
                 {"config", cfg},
                 {"config_hash", hash},
                 {"seed", cfg["seed"]},
                 {"stream_layout",
                  {{"generator", "philox4x32-10"}, {"block_size", kBlockSize}, {"assignment", "substream per block index"}}},
                 {"results", outcome.results},
                 {"checks", checks},
                 {"passed", passed}};
  if (!passed) {
    Json failures = Json::array();
    for (const auto& c : outcome.checks)
      if (!c.passed && !c.probe)
        failures.push_back({{"check", c.name}, {"seed", cfg["seed"]}, {"config_hash", hash}, {"detail", c.detail}});
    report["failures"] = failures;
  }
  return report;
}

void print_checks(std::ostream& out, const std::string& experiment, const Json& report) {
  for (const auto& c : report["checks"]) {
    const char* tag = c["passed"].get<bool>() ? "PASS" : (c["probe"].get<bool>() ? "NOTE" : "FAIL");
    out << "[" << tag << "] " << experiment << ": " << c["name"].get<std::string>() << '\n';
  }
  out << experiment << ": " << (report["passed"].get<bool>() ? "all checks passed" : "a check failed")
      << " (seed " << report["seed"] << ", config " << report["config_hash"].get<std::string>() << ")\n";
}

}  // namespace

std::vector<std::string> experiments() {
  std::vector<std::string> names;
  for (const auto& [name, keys] : specific_keys()) names.push_back(name);
  return names;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::uint64_t config_hash(const Json& effective) {
  Json copy = effective;
  copy.erase("workers");
  copy.erase("out");
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : copy.dump()) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

Json effective_config(const std::string& experiment, const Json& file_config) {
  const auto it = specific_keys().find(experiment);
  if (it == specific_keys().end()) throw ConfigError("/experiment", "unknown experiment '" + experiment + "'");
  if (!file_config.is_object()) throw ConfigError("/", "config must be a JSON object");
  for (const auto& [key, value] : file_config.items()) {
    const bool known = std::find(kCommonKeys.begin(), kCommonKeys.end(), key) != kCommonKeys.end() ||
                       std::find(it->second.begin(), it->second.end(), key) != it->second.end();
    if (!known) throw ConfigError("/" + key, "unknown field for experiment '" + experiment + "'");
  }
  if (file_config.contains("experiment") && file_config["experiment"] != experiment)
    throw ConfigError("/experiment", "config is for '" + file_config["experiment"].dump() + "', not '" + experiment + "'");
  Json cfg = defaults_for(experiment);
  cfg.update(file_config);
  if (!cfg["out"].is_string()) throw ConfigError("/out", "expected a string");
  return cfg;
}

Json run_experiment(const std::string& experiment, const Json& cfg) {
  Outcome outcome = dispatch(experiment, cfg);
  return build_report(experiment, cfg, outcome);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"corrlab: correlation-inequality verification runner"};
  app.require_subcommand(1);

  struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::optional<double> tolerance;
    std::optional<std::size_t> trials, grid, steps, restarts;
    std::optional<double> step;
    std::vector<double> lambdas;
    std::string report;
  } flags;

  for (const auto& name : experiments()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", flags.config, "JSON config file");
    sub->add_option("--seed", flags.seed, "RNG seed (u64)");
    sub->add_option("--samples", flags.samples, "Monte Carlo sample count");
    sub->add_option("--workers", flags.workers, "worker threads (0 = all, 1 = serial reference)");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--tolerance", flags.tolerance, "check tolerance (absolute, or SE multiplier for MC checks)");
    const auto& keys = specific_keys().at(name);
    auto has = [&](const char* k) { return std::find(keys.begin(), keys.end(), k) != keys.end(); };
    if (has("trials")) sub->add_option("--trials", flags.trials, "random fixtures (per q value)");
    if (has("grid")) sub->add_option("--grid", flags.grid, "grid points");
    if (has("step")) sub->add_option("--step", flags.step, "finite-difference step h");
    if (has("lambdas")) sub->add_option("--lambdas", flags.lambdas, "lambda values in [0, 1)");
    if (has("steps")) sub->add_option("--steps", flags.steps, "descent steps per restart");
    if (has("restarts")) sub->add_option("--restarts", flags.restarts, "random restarts");
  }
  auto* replay = app.add_subcommand("replay", "re-run a report's config and compare results bit-exactly");
  replay->add_option("--report", flags.report, "report JSON written by a previous run")->required();
  replay->add_option("--workers", flags.workers, "worker threads for the replay");
  replay->add_option("--out", flags.out, "output directory for the replayed report");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (replay->parsed()) {
      const Json original = load_json_file(flags.report, "--report");
      if (!original.contains("config") || !original.contains("experiment") || !original.contains("results"))
        throw ConfigError("--report", "not a corrlab report");
      const auto experiment = original["experiment"].get<std::string>();
      Json cfg = effective_config(experiment, original["config"]);
      if (hex(config_hash(cfg)) != original["config_hash"].get<std::string>())
        throw ConfigError("/config_hash", "does not match the echoed config");
      if (flags.workers) cfg["workers"] = *flags.workers;
      if (flags.out) cfg["out"] = *flags.out;
      Outcome outcome = dispatch(experiment, cfg);
      Json report = build_report(experiment, cfg, outcome);
      const bool identical = report["results"] == original["results"] && report["checks"] == original["checks"];
      out << "replay " << experiment << " (seed " << cfg["seed"] << ", config " << report["config_hash"].get<std::string>()
          << ", workers " << cfg["workers"] << "): " << (identical ? "bit-identical" : "DIFFERS") << '\n';
      if (flags.out) write_outputs(experiment, report, &outcome);
      return identical ? kExitPass : kExitCheckFailed;
    }

    std::string experiment;
    for (const auto* sub : app.get_subcommands()) experiment = sub->get_name();

    Json file_cfg = Json::object();
    if (!flags.config.empty()) file_cfg = load_json_file(flags.config, "--config");
    Json cfg = effective_config(experiment, file_cfg);
    if (flags.seed) cfg["seed"] = *flags.seed;
    if (flags.samples) cfg["samples"] = *flags.samples;
    if (flags.workers) cfg["workers"] = *flags.workers;
    if (flags.out) cfg["out"] = *flags.out;
    if (flags.tolerance) cfg["tolerance"] = *flags.tolerance;
    if (flags.trials) cfg["trials"] = *flags.trials;
    if (flags.grid) cfg["grid"] = *flags.grid;
    if (flags.step) cfg["step"] = *flags.step;
    if (!flags.lambdas.empty()) cfg["lambdas"] = flags.lambdas;
    if (flags.steps) cfg["steps"] = *flags.steps;
    if (flags.restarts) cfg["restarts"] = *flags.restarts;

    const auto start = std::chrono::steady_clock::now();
    Outcome outcome = dispatch(experiment, cfg);
    Json report = build_report(experiment, cfg, outcome);
    report["elapsed_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_outputs(experiment, report, &outcome);
    print_checks(out, experiment, report);
    return report["passed"].get<bool>() ? kExitPass : kExitCheckFailed;
  } catch (const ConfigError& e) {
    err << "config error at " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace corrlab::cli
