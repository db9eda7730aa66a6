#include "corrlab/correlation.hpp"

#include <cmath>
#include <sstream>

#include "corrlab/error.hpp"

namespace corrlab {
namespace {

void check_split(const Functionals& xi, std::size_t split, std::size_t f_dim, std::size_t g_dim) {
  require(split >= 1 && split < xi.count(), "split m must satisfy 1 <= m < k");
  require(f_dim == split, "f dimension must equal the split m");
  require(g_dim == xi.count() - split, "g dimension must equal k - m");
}

/// alpha = sum_j u_j xi_{offset+j} in R^n.
std::vector<double> block_pull_back(const Functionals& xi, std::span<const double> u, std::size_t offset) {
  std::vector<double> alpha(xi.dim(), 0.0);
  for (std::size_t j = 0; j < u.size(); ++j)
    for (std::size_t d = 0; d < alpha.size(); ++d) alpha[d] += u[j] * xi[offset + j][d];
  return alpha;
}

/// E[f g] = sum_p sum_r a_p b_r (phi(alpha_p + beta_r) + phi(alpha_p - beta_r)) / 2,
/// with p outermost so that g = 1 reproduces E[f] term for term.
double exact_product_expectation(const StableModel& model, const Functionals& xi, std::size_t split,
                                 const CosinePolynomial& f, const CosinePolynomial& g) {
  std::vector<std::vector<double>> betas;
  for (const auto& term : g.terms()) betas.push_back(block_pull_back(xi, term.frequency, split));
  std::vector<double> v(xi.dim());
  double s = 0.0;
  for (const auto& tf : f.terms()) {
    const auto alpha = block_pull_back(xi, tf.frequency, 0);
    double inner = 0.0;
    for (std::size_t r = 0; r < betas.size(); ++r) {
      for (std::size_t d = 0; d < v.size(); ++d) v[d] = alpha[d] + betas[r][d];
      const double plus = char_value(model, v);
      for (std::size_t d = 0; d < v.size(); ++d) v[d] = alpha[d] - betas[r][d];
      inner += g.terms()[r].mass * (0.5 * (plus + char_value(model, v)));
    }
    s += tf.mass * inner;
  }
  return s;
}

}  // namespace

const char* to_string(GapMethod m) { return m == GapMethod::exact ? "exact" : "monte_carlo"; }

double exact_expectation(const StableModel& model, const Functionals& xi, const CosinePolynomial& f,
                         std::size_t offset) {
  require(xi.dim() == model.dim(), "exact_expectation: functional/model dimension mismatch");
  require(offset + f.dim() <= xi.count(), "exact_expectation: function dimension exceeds k");
  double s = 0.0;
  for (const auto& term : f.terms())
    s += term.mass * char_value(model, block_pull_back(xi, term.frequency, offset));
  return s;
}

SymmetryPair i1_i2_symmetry(const StableModel& model, const Functionals& xi, std::size_t split,
                            const CosinePolynomial& f, const CosinePolynomial& g, AtomLayout g_layout) {
  require(xi.dim() == model.dim(), "i1_i2_symmetry: functional/model dimension mismatch");
  check_split(xi, split, f.dim(), g.dim());

  const auto mu = representing_measure(f);
  std::vector<MeasureAtom> nu;
  if (g_layout == AtomLayout::symmetrized) {
    nu = representing_measure(g);
  } else {
    for (const auto& term : g.terms()) nu.push_back({term.frequency, term.mass});
  }

  std::vector<std::vector<double>> alphas;
  alphas.reserve(mu.size());
  for (const auto& a : mu) alphas.push_back(block_pull_back(xi, a.point, 0));

  SymmetryPair out;
  std::vector<double> v(xi.dim());
  for (const auto& b : nu) {
    const auto beta = block_pull_back(xi, b.point, split);
    for (std::size_t p = 0; p < mu.size(); ++p) {
      const double w = mu[p].mass * b.mass;
      for (std::size_t d = 0; d < v.size(); ++d) v[d] = alphas[p][d] + beta[d];
      out.plus += w * char_value(model, v);
      for (std::size_t d = 0; d < v.size(); ++d) v[d] = alphas[p][d] - beta[d];
      out.minus += w * char_value(model, v);
    }
  }
  return out;
}

GapReport correlation_gap_exact(const StableModel& model, const Functionals& xi, std::size_t split,
                                const CosinePolynomial& f, const CosinePolynomial& g) {
  check_split(xi, split, f.dim(), g.dim());
  GapReport r;
  r.method = GapMethod::exact;
  r.split = split;
  r.e_fg.mean = exact_product_expectation(model, xi, split, f, g);
  r.e_f.mean = exact_expectation(model, xi, f, 0);
  r.e_g.mean = exact_expectation(model, xi, g, split);
  r.gap.mean = r.e_fg.mean - r.e_f.mean * r.e_g.mean;
  r.threshold = -1e-10 * f.at_origin() * g.at_origin();
  r.pass = r.gap.mean >= r.threshold;
  return r;
}

GapReport correlation_gap_mc(const StableModel& model, const Functionals& xi, std::size_t split,
                             const CatalogFunction& f, const CatalogFunction& g, std::size_t n_samples,
                             const RngStream& rng, Execution exec) {
  check_split(xi, split, dimension(f), dimension(g));
  require(n_samples >= 1000, "correlation_gap_mc: need at least 1000 samples");
  const StableModel joint = project(model, xi);
  const std::size_t k = xi.count();

  auto acc = run_blocks(
      n_samples, rng, [] { return MomentAccumulator(3); },
      [&](MomentAccumulator& a, RngStream& r, std::size_t first, std::size_t count) {
        std::vector<double> x(k);
        const std::span<const double> head(x.data(), split);
        const std::span<const double> tail(x.data() + split, k - split);
        for (std::size_t s = 0; s < count; ++s) {
          sample_vector(joint, r, x);
          double fv = 0.0;
          double gv = 0.0;
          try {
            fv = evaluate(f, head);
            gv = evaluate(g, tail);
          } catch (const std::exception& e) {
            throw EvaluationError(first + s, e.what());
          }
          if (!std::isfinite(fv) || !std::isfinite(gv))
            throw EvaluationError(first + s, "non-finite function value");
          const double obs[3] = {fv * gv, fv, gv};
          a.add(obs);
        }
      },
      exec);

  GapReport r;
  r.method = GapMethod::monte_carlo;
  r.split = split;
  r.seed = rng.seed();
  r.e_fg = acc.estimate(0);
  r.e_f = acc.estimate(1);
  r.e_g = acc.estimate(2);
  const double weights[3] = {1.0, -r.e_g.mean, -r.e_f.mean};
  r.gap = {r.e_fg.mean - r.e_f.mean * r.e_g.mean, acc.linear_std_error(weights), acc.count()};
  r.threshold = -3.0 * r.gap.std_error;
  r.positive_definite = is_positive_definite(f) && is_positive_definite(g);
  r.pass = r.gap.mean >= r.threshold;
  return r;
}

GapFixture random_gap_fixture(RngStream& rng, double q) {
  auto pick = [&rng](std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng.uniform() * static_cast<double>(hi - lo + 1));
  };
  const std::size_t n = pick(1, 4);
  const std::size_t atoms = pick(1, 6);
  const std::size_t k = pick(2, 5);
  const std::size_t split = pick(1, k - 1);
  StableModel model = random_stable_model(rng, q, n, atoms);
  Functionals xi = random_functionals(rng, k, n);
  CosinePolynomial f = random_cosine_polynomial(rng, split, pick(1, 4), 1.0);
  CosinePolynomial g = random_cosine_polynomial(rng, k - split, pick(1, 4), 1.0);
  return {std::move(model), std::move(xi), split, std::move(f), std::move(g)};
}

std::string csv_header() { return "fixture_id,method,gap,se,pass"; }

std::string csv_row(const GapReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.fixture_id << ',' << to_string(r.method) << ',' << r.gap.mean << ',' << r.gap.std_error << ','
     << (r.pass ? "true" : "false");
  return os.str();
}

}  // namespace corrlab
