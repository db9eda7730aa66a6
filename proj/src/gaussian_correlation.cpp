#include "corrlab/gaussian_correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "corrlab/error.hpp"
#include "corrlab/special.hpp"

namespace corrlab {
namespace {

/// One mergeable mean/variance accumulator per output.
struct MeanVector {
  std::vector<MeanAccumulator> items;

  void merge(const MeanVector& other) {
    for (std::size_t i = 0; i < items.size(); ++i) items[i].merge(other.items[i]);
  }
};

/// Output = sum of weight * indicator(probe).
using LinearOutput = std::vector<std::pair<std::size_t, double>>;

/// Evaluates 1_F(x) 1_G(y), (x, y) = L_p z, at every probe factor L_p on a
/// shared draw z ~ N(0, I_2k), and accumulates the requested linear
/// combinations of those indicators.
std::vector<McEstimate> crn_outputs(const std::vector<Matrix>& factors, const ConvexBody& f,
                                    const ConvexBody& g, const std::vector<LinearOutput>& outputs,
                                    std::size_t n_samples, const RngStream& rng, Execution exec) {
  const std::size_t k = f.dim();
  const std::size_t n_out = outputs.size();
  auto acc = run_blocks(
      n_samples, rng, [n_out] { return MeanVector{std::vector<MeanAccumulator>(n_out)}; },
      [&](MeanVector& a, RngStream& r, std::size_t, std::size_t count) {
        std::vector<double> z(2 * k);
        std::vector<double> w(2 * k);
        std::vector<double> ind(factors.size());
        const std::span<const double> x(w.data(), k);
        const std::span<const double> y(w.data() + k, k);
        for (std::size_t s = 0; s < count; ++s) {
          for (double& v : z) v = r.normal();
          for (std::size_t p = 0; p < factors.size(); ++p) {
            lower_multiply(factors[p], z, w);
            ind[p] = (f.contains(x) && g.contains(y)) ? 1.0 : 0.0;
          }
          for (std::size_t o = 0; o < n_out; ++o) {
            double v = 0.0;
            for (const auto& [probe, weight] : outputs[o]) v += weight * ind[probe];
            a.items[o].add(v);
          }
        }
      },
      exec);
  std::vector<McEstimate> out(n_out);
  for (std::size_t o = 0; o < n_out; ++o) out[o] = acc.items[o].estimate();
  return out;
}

void require_same_dim(const ConvexBody& f, const ConvexBody& g) {
  require(f.dim() == g.dim(), "bodies F and G must live in the same R^k");
}

void require_bounded(const ConvexBody& body) {
  require(body.bounded(), "unbounded body rejected (compact closure required)");
}

CovarianceBlocks with_b(const CovarianceBlocks& base, Matrix b) {
  return {base.a, base.c, std::move(b)};
}

Matrix unit_perturbation(std::size_t k, std::size_t coord, double h) {
  Matrix b(k, k);
  b(coord / k, coord % k) = h;
  return b;
}

Matrix add_scaled(const Matrix& a, const Matrix& b, double s) {
  Matrix out(a);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) += s * b(i, j);
  return out;
}

}  // namespace

CovarianceBlocks CovarianceBlocks::identity(std::size_t k) {
  return {SymMatrix::identity(k), SymMatrix::identity(k), Matrix(k, k)};
}

CovarianceBlocks CovarianceBlocks::scaled_identity(std::size_t k, double lambda) {
  Matrix b(k, k);
  for (std::size_t i = 0; i < k; ++i) b(i, i) = lambda;
  return {SymMatrix::identity(k), SymMatrix::identity(k), std::move(b)};
}

AssembledCovariance assemble(const CovarianceBlocks& blocks) {
  const std::size_t k = blocks.a.dim();
  require(k >= 1, "assemble: empty blocks");
  require(blocks.c.dim() == k && blocks.b.rows() == k && blocks.b.cols() == k,
          "assemble: A, B, C must all be k x k");
  for (const SymMatrix* m : {&blocks.a, &blocks.c}) {
    try {
      (void)cholesky(*m);
    } catch (const NotSpdError& e) {
      throw InvalidArgument(std::string("assemble: diagonal block ") + e.what());
    }
  }
  SymMatrix full(2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      full(i, j) = blocks.a(i, j);
      full(k + i, k + j) = blocks.c(i, j);
    }
    for (std::size_t j = 0; j < k; ++j) full(k + j, i) = blocks.b(i, j);
  }
  try {
    Matrix factor = cholesky(full);
    return {std::move(full), std::move(factor)};
  } catch (const NotSpdError& e) {
    throw InvalidCovariance(e.what());
  }
}

bool is_feasible(const CovarianceBlocks& blocks) {
  try {
    (void)assemble(blocks);
    return true;
  } catch (const InvalidCovariance&) {
    return false;
  }
}

McEstimate product_measure_mc(const CovarianceBlocks& blocks, const ConvexBody& f, const ConvexBody& g,
                              std::size_t n_samples, const RngStream& rng, Execution exec) {
  require_same_dim(f, g);
  require(f.dim() == blocks.k(), "product_measure_mc: body dimension differs from block size");
  const auto assembled = assemble(blocks);
  return crn_outputs({assembled.factor}, f, g, {{{0, 1.0}}}, n_samples, rng, exec).front();
}

double box_probability_2d(double rho, double a) {
  require(std::abs(rho) < 1.0, "box_probability_2d: |rho| must be < 1");
  require(a > 0.0, "box_probability_2d: half-width must be > 0");
  const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
  auto integrand = [&](double x) {
    return normal_pdf(x) * (normal_cdf((a - rho * x) / s) - normal_cdf((-a - rho * x) / s));
  };
  // The integrand is even in x; splitting at 0 keeps both halves smooth.
  return 2.0 * integrate(integrand, 0.0, a, 1e-14, 10).value;
}

double box_oracle_second_difference(double a, double h) {
  return (box_probability_2d(h, a) - 2.0 * box_probability_2d(0.0, a) + box_probability_2d(-h, a)) / (h * h);
}

double theta(double a) {
  require(a >= 0.0, "theta: a must be >= 0");
  return -2.0 * a * std::exp(-0.5 * a * a);
}

double gauss_mass(double a) {
  return std::sqrt(2.0 * std::numbers::pi) * (2.0 * normal_cdf(a) - 1.0);
}

double hessian_prefactor(std::size_t k) { return std::pow(2.0 * std::numbers::pi, -static_cast<double>(k)); }

SymMatrix box_curvature(const Box& box) {
  const std::size_t k = box.half_widths.size();
  SymMatrix l(k);
  for (std::size_t i = 0; i < k; ++i) {
    double v = theta(box.half_widths[i]);
    for (std::size_t j = 0; j < k; ++j)
      if (j != i) v *= gauss_mass(box.half_widths[j]);
    l(i, i) = v;
  }
  return l;
}

CurvatureEstimate curvature_mc(const ConvexBody& body, std::size_t n_samples, const RngStream& rng,
                               Execution exec) {
  require_bounded(body);
  const std::size_t k = body.dim();
  const std::size_t d = k * (k + 1) / 2;
  const double scale = std::pow(2.0 * std::numbers::pi, 0.5 * static_cast<double>(k));

  auto acc = run_blocks(
      n_samples, rng, [d] { return MomentAccumulator(d); },
      [&](MomentAccumulator& a, RngStream& r, std::size_t, std::size_t count) {
        std::vector<double> x(k);
        std::vector<double> obs(d);
        for (std::size_t s = 0; s < count; ++s) {
          for (double& v : x) v = r.normal();
          const bool inside = body.contains(x);
          std::size_t idx = 0;
          for (std::size_t i = 0; i < k; ++i)
            for (std::size_t m = 0; m <= i; ++m)
              obs[idx++] = inside ? x[i] * x[m] - (i == m ? 1.0 : 0.0) : 0.0;
          a.add(obs);
        }
      },
      exec);

  CurvatureEstimate out;
  out.value = SymMatrix(k);
  out.std_error = SymMatrix(k);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t m = 0; m <= i; ++m, ++idx) {
      const auto e = acc.estimate(idx);
      out.value(i, m) = scale * e.mean;
      out.std_error(i, m) = scale * e.std_error;
    }

  const auto eig = sym_eigen(out.value);
  out.eigenvalues = eig.values;
  std::vector<double> weights(d);
  for (std::size_t e = 0; e < k; ++e) {
    idx = 0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t m = 0; m <= i; ++m)
        weights[idx++] = scale * eig.vectors(i, e) * eig.vectors(m, e) * (i == m ? 1.0 : 2.0);
    out.eigenvalue_std_errors.push_back(acc.linear_std_error(weights));
  }

  out.negative_definite = true;
  for (std::size_t e = 0; e < k; ++e)
    out.negative_definite = out.negative_definite && out.eigenvalues[e] < -3.0 * out.eigenvalue_std_errors[e];

  if (const auto* box = std::get_if<Box>(&body.shape())) {
    out.closed_form = box_curvature(*box);
    out.closed_form_eigenvalues = sym_eigenvalues(*out.closed_form);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t m = 0; m <= i; ++m) {
        const double diff = std::abs(out.value(i, m) - (*out.closed_form)(i, m));
        const double se = out.std_error(i, m);
        const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        out.max_closed_form_z = std::max(out.max_closed_form_z, z);
      }
    out.matches_closed_form = out.max_closed_form_z <= 3.0;
    for (double ev : *out.closed_form_eigenvalues) out.negative_definite = out.negative_definite && ev < 0.0;
  }
  return out;
}

HessianReport hessian_at_zero(const ConvexBody& f, const ConvexBody& g, std::size_t n_samples,
                              const RngStream& rng, Execution exec) {
  require_same_dim(f, g);
  require_bounded(f);
  require_bounded(g);
  HessianReport r;
  r.k = f.dim();
  r.prefactor = hessian_prefactor(r.k);
  r.l = curvature_mc(f, n_samples, rng.child(1), exec);
  r.k_block = curvature_mc(g, n_samples, rng.child(2), exec);
  r.local_minimum_consistent = r.l.negative_definite && r.k_block.negative_definite;
  return r;
}

FdReport hessian_fd(const ConvexBody& f, const ConvexBody& g, double step, std::size_t n_samples,
                    const RngStream& rng, Execution exec) {
  require_same_dim(f, g);
  require(step > 0.0, "hessian_fd: step must be > 0");
  const std::size_t k = f.dim();
  const std::size_t nb = k * k;
  const auto base = CovarianceBlocks::identity(k);

  std::vector<Matrix> factors;
  auto add_probe = [&](Matrix b) {
    try {
      factors.push_back(assemble(with_b(base, std::move(b))).factor);
    } catch (const InvalidCovariance&) {
      throw InvalidArgument("hessian_fd: step too large, a probe covariance is not SPD");
    }
    return factors.size() - 1;
  };

  const std::size_t center = add_probe(Matrix(k, k));
  std::vector<std::size_t> plus(nb), minus(nb);
  for (std::size_t a = 0; a < nb; ++a) {
    plus[a] = add_probe(unit_perturbation(k, a, step));
    minus[a] = add_probe(unit_perturbation(k, a, -step));
  }
  std::vector<LinearOutput> outputs;
  const double h2 = step * step;
  for (std::size_t a = 0; a < nb; ++a)
    outputs.push_back({{plus[a], 0.5 / step}, {minus[a], -0.5 / step}});
  std::vector<std::pair<std::size_t, std::size_t>> entries;
  for (std::size_t a = 0; a < nb; ++a) {
    for (std::size_t b = a; b < nb; ++b) {
      entries.emplace_back(a, b);
      if (a == b) {
        outputs.push_back({{plus[a], 1.0 / h2}, {center, -2.0 / h2}, {minus[a], 1.0 / h2}});
        continue;
      }
      const auto ea = unit_perturbation(k, a, step);
      const auto eb = unit_perturbation(k, b, step);
      const std::size_t pp = add_probe(add_scaled(ea, eb, 1.0));
      const std::size_t pm = add_probe(add_scaled(ea, eb, -1.0));
      const std::size_t mp = add_probe(add_scaled(eb, ea, -1.0));
      const std::size_t mm = add_probe(add_scaled(add_scaled(Matrix(k, k), ea, -1.0), eb, -1.0));
      const double w = 0.25 / h2;
      outputs.push_back({{pp, w}, {pm, -w}, {mp, -w}, {mm, w}});
    }
  }

  const auto est = crn_outputs(factors, f, g, outputs, n_samples, rng, exec);

  FdReport r;
  r.k = k;
  r.step = step;
  r.gradient.assign(est.begin(), est.begin() + static_cast<std::ptrdiff_t>(nb));
  r.hessian = Matrix(nb, nb);
  r.hessian_std_error = Matrix(nb, nb);
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto [a, b] = entries[e];
    const auto& v = est[nb + e];
    r.hessian(a, b) = r.hessian(b, a) = v.mean;
    r.hessian_std_error(a, b) = r.hessian_std_error(b, a) = v.std_error;
  }

  r.gradient_vanishes = std::all_of(r.gradient.begin(), r.gradient.end(),
                                    [](const McEstimate& e) { return std::abs(e.mean) <= 3.0 * e.std_error; });
  r.diagonal_positive = true;
  for (std::size_t a = 0; a < nb; ++a) r.diagonal_positive = r.diagonal_positive && r.hessian(a, a) > 0.0;

  // Analytic diagonal kappa L_ii K_jj; closed forms where available, else MC.
  if (f.bounded() && g.bounded()) {
    const auto curv = hessian_at_zero(f, g, n_samples, rng.child(7), exec);
    const SymMatrix& l = curv.l.closed_form ? *curv.l.closed_form : curv.l.value;
    const SymMatrix& kk = curv.k_block.closed_form ? *curv.k_block.closed_form : curv.k_block.value;
    for (std::size_t a = 0; a < nb; ++a) {
      const std::size_t i = a / k;
      const std::size_t j = a % k;
      const double analytic = curv.prefactor * l(i, i) * kk(j, j);
      r.analytic_diagonal.push_back(analytic);
      const double se = r.hessian_std_error(a, a);
      r.diagonal_z.push_back(se > 0.0 ? (r.hessian(a, a) - analytic) / se : 0.0);
    }
  }
  return r;
}

std::vector<double> symmetric_grid(double half_width, std::size_t points) {
  require(points >= 2, "symmetric_grid: need at least 2 points");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(points - 1);
    grid[i] = -half_width + 2.0 * half_width * t;
  }
  // Mirror exactly so that grid[i] == -grid[points-1-i].
  for (std::size_t i = 0; i < points / 2; ++i) grid[points - 1 - i] = -grid[i];
  if (points % 2 == 1) grid[points / 2] = 0.0;
  return grid;
}

MarginalReport marginal_phi(const ConvexBody& f, const std::vector<double>& grid_in, std::size_t n_samples,
                            const RngStream& rng, Execution exec, double z) {
  require_bounded(f);
  require(grid_in.size() >= 2, "marginal_phi: grid needs at least 2 points");
  std::vector<double> grid(grid_in);
  std::sort(grid.begin(), grid.end());
  for (std::size_t i = 0; i < grid.size(); ++i)
    require(std::abs(grid[i] + grid[grid.size() - 1 - i]) <= 1e-12 * (1.0 + std::abs(grid[i])),
            "marginal_phi: grid must be symmetric about 0");

  const std::size_t k = f.dim();
  const std::size_t np = grid.size();
  MarginalReport r;
  r.points.resize(np);

  if (k == 1) {
    for (std::size_t i = 0; i < np; ++i) {
      const double x = grid[i];
      r.points[i] = {x, {f.contains(std::span<const double>(&x, 1)) ? 1.0 : 0.0, 0.0, n_samples}};
    }
  } else {
    const double scale = std::pow(2.0 * std::numbers::pi, 0.5 * static_cast<double>(k - 1));
    auto acc = run_blocks(
        n_samples, rng, [np] { return MeanVector{std::vector<MeanAccumulator>(np)}; },
        [&](MeanVector& a, RngStream& rs, std::size_t, std::size_t count) {
          std::vector<double> x(k);
          for (std::size_t s = 0; s < count; ++s) {
            for (std::size_t d = 1; d < k; ++d) x[d] = rs.normal();
            for (std::size_t i = 0; i < np; ++i) {
              x[0] = grid[i];
              a.items[i].add(f.contains(x) ? 1.0 : 0.0);
            }
          }
        },
        exec);
    for (std::size_t i = 0; i < np; ++i) {
      const auto e = acc.items[i].estimate();
      r.points[i] = {grid[i], {scale * e.mean, scale * e.std_error, e.n_samples}};
    }
  }

  auto combined = [](const McEstimate& a, const McEstimate& b) {
    return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
  };
  constexpr double kSlack = 1e-14;

  r.even = true;
  for (std::size_t i = 0; i < np; ++i) {
    const auto& a = r.points[i].phi;
    const auto& b = r.points[np - 1 - i].phi;
    r.even = r.even && std::abs(a.mean - b.mean) <= z * combined(a, b) + kSlack;
  }

  // Decreasing in |x|: walk outward from the centre on each side.
  r.monotone = true;
  for (std::size_t i = 0; i + 1 < np; ++i) {
    const auto& a = r.points[i].phi;
    const auto& b = r.points[i + 1].phi;
    const bool right_half = r.points[i].x >= 0.0;
    const bool left_half = r.points[i + 1].x <= 0.0;
    if (right_half) r.monotone = r.monotone && b.mean <= a.mean + z * combined(a, b) + kSlack;
    if (left_half) r.monotone = r.monotone && a.mean <= b.mean + z * combined(a, b) + kSlack;
  }

  // phi(mid)^2 >= phi(lo) phi(hi) (1 - 3 relSE) on equally spaced triples;
  // relSE is the delta-method relative error of phi(lo) phi(hi) / phi(mid)^2.
  r.log_concave = true;
  for (std::size_t i = 1; i + 1 < np; ++i) {
    const auto& lo = r.points[i - 1];
    const auto& mid = r.points[i];
    const auto& hi = r.points[i + 1];
    if (std::abs((lo.x + hi.x) / 2.0 - mid.x) > 1e-12 * (1.0 + std::abs(mid.x))) continue;
    const double prod = lo.phi.mean * hi.phi.mean;
    if (prod <= 0.0) continue;
    if (mid.phi.mean <= 0.0) {
      r.log_concave = false;
      continue;
    }
    const double rel_lo = lo.phi.std_error / lo.phi.mean;
    const double rel_hi = hi.phi.std_error / hi.phi.mean;
    const double rel_mid = mid.phi.std_error / mid.phi.mean;
    const double rel = std::sqrt(rel_lo * rel_lo + rel_hi * rel_hi + 4.0 * rel_mid * rel_mid);
    r.log_concave = r.log_concave && mid.phi.mean * mid.phi.mean >= prod * (1.0 - z * rel) - kSlack;
  }
  return r;
}

LambdaLimitReport lambda_limit(const ConvexBody& f, const ConvexBody& g, const std::vector<double>& lambdas_in,
                               std::size_t n_samples, const RngStream& rng, Execution exec) {
  require_same_dim(f, g);
  require(!lambdas_in.empty(), "lambda_limit: empty lambda list");
  std::vector<double> lambdas(lambdas_in);
  std::sort(lambdas.begin(), lambdas.end());
  for (double l : lambdas) require(l >= 0.0 && l < 1.0, "lambda_limit: lambda must lie in [0, 1)");
  const std::size_t k = f.dim();

  LambdaLimitReport r;
  const RngStream mu_stream = rng.child(1);
  for (double l : lambdas)
    r.rows.push_back({l, product_measure_mc(CovarianceBlocks::scaled_identity(k, l), f, g, n_samples, mu_stream, exec)});

  auto acc = run_blocks(
      n_samples, rng.child(2), [] { return MomentAccumulator(3); },
      [&](MomentAccumulator& a, RngStream& rs, std::size_t, std::size_t count) {
        std::vector<double> x(k);
        for (std::size_t s = 0; s < count; ++s) {
          for (double& v : x) v = rs.normal();
          const double in_f = f.contains(x) ? 1.0 : 0.0;
          const double in_g = g.contains(x) ? 1.0 : 0.0;
          const double obs[3] = {in_f, in_g, in_f * in_g};
          a.add(obs);
        }
      },
      exec);
  r.nu_f = acc.estimate(0);
  r.nu_g = acc.estimate(1);
  r.nu_intersection = acc.estimate(2);
  const double w[3] = {r.nu_g.mean, r.nu_f.mean, 0.0};
  r.nu_product = {r.nu_f.mean * r.nu_g.mean, acc.linear_std_error(w), acc.count()};

  const auto& last = r.rows.back().mu;
  r.limit_gap = std::abs(last.mean - r.nu_intersection.mean);
  r.limit_se = std::sqrt(last.std_error * last.std_error +
                         r.nu_intersection.std_error * r.nu_intersection.std_error);
  r.limit_ok = r.limit_gap <= 3.0 * r.limit_se;

  if (r.rows.front().lambda == 0.0) {
    const auto& mu0 = r.rows.front().mu;
    r.factorization_gap = std::abs(mu0.mean - r.nu_product.mean);
    r.factorization_se = std::sqrt(mu0.std_error * mu0.std_error + r.nu_product.std_error * r.nu_product.std_error);
    r.factorization_ok = *r.factorization_gap <= 3.0 * *r.factorization_se;
  }

  if (r.rows.size() >= 2) {
    const auto& a = r.rows[r.rows.size() - 2];
    const auto& b = r.rows.back();
    const double sa = std::sqrt(1.0 - a.lambda);
    const double sb = std::sqrt(1.0 - b.lambda);
    r.sqrt_extrapolated_limit = (b.mu.mean * sa - a.mu.mean * sb) / (sa - sb);
  }
  return r;
}

std::vector<std::vector<double>> gram_matrix(const Functionals& xi) {
  const std::size_t n = xi.count();
  std::vector<std::vector<double>> g(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g[i][j] = dot(xi[i], xi[j]);
  return g;
}

RegularizedFunctionals regularize_rank(const Functionals& xi, double eps) {
  const std::size_t count = xi.count();
  const std::size_t n = xi.dim();
  require(count >= n, "regularize_rank: need at least as many vectors as the ambient dimension");
  require(eps >= 0.0 && std::isfinite(eps), "regularize_rank: eps must be >= 0");

  std::vector<std::vector<double>> embedded(count, std::vector<double>(count, 0.0));
  for (std::size_t i = 0; i < count; ++i) std::copy(xi[i].begin(), xi[i].end(), embedded[i].begin());

  double scale = 0.0;
  for (const auto& v : embedded) scale = std::max(scale, std::sqrt(dot(v, v)));
  const double tol = 1e-10 * std::max(scale, 1.0);

  auto orthogonalize = [](std::vector<double> r, const std::vector<std::vector<double>>& basis) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        const double c = dot(r, b);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= c * b[i];
      }
    return r;
  };

  std::vector<std::vector<double>> basis;
  std::vector<bool> independent(count, false);
  for (std::size_t i = 0; i < count; ++i) {
    auto r = orthogonalize(embedded[i], basis);
    const double norm = std::sqrt(dot(r, r));
    if (norm > tol) {
      for (double& x : r) x /= norm;
      basis.push_back(std::move(r));
      independent[i] = true;
    }
  }
  const std::size_t rank = basis.size();

  // Orthonormal complement of span(xi) in R^count.
  std::vector<std::vector<double>> complement;
  auto span_plus = basis;
  for (std::size_t d = 0; d < count && span_plus.size() < count; ++d) {
    std::vector<double> e(count, 0.0);
    e[d] = 1.0;
    auto r = orthogonalize(std::move(e), span_plus);
    const double norm = std::sqrt(dot(r, r));
    if (norm > 1e-8) {
      for (double& x : r) x /= norm;
      span_plus.push_back(r);
      complement.push_back(std::move(r));
    }
  }

  RegularizedFunctionals out{Functionals(embedded), rank, rank, {}, false};
  if (eps > 0.0) {
    std::size_t next = 0;
    for (std::size_t i = 0; i < count; ++i) {
      if (independent[i]) continue;
      for (std::size_t d = 0; d < count; ++d) embedded[i][d] += eps * complement[next][d];
      out.perturbed.push_back(i);
      ++next;
    }
    out.vectors = Functionals(embedded);
  } else {
    out.degenerate = rank < count;
  }
  out.output_rank = numerical_rank(out.vectors.vectors());
  return out;
}

ProbeReport probe_minimum(const ConvexBody& f, const ConvexBody& g, const SymMatrix& a, const SymMatrix& c,
                          const ProbeOptions& opt, const RngStream& rng, Execution exec) {
  require_same_dim(f, g);
  require_bounded(f);
  require_bounded(g);
  const std::size_t k = f.dim();
  require(a.dim() == k && c.dim() == k, "probe_minimum: A and C must be k x k");
  require(opt.steps >= 2 && opt.restarts >= 1, "probe_minimum: need >= 2 steps and >= 1 restart");
  require(opt.fd_step > 0.0 && opt.learning_rate > 0.0, "probe_minimum: step sizes must be > 0");
  const CovarianceBlocks zero{a, c, Matrix(k, k)};
  const auto zero_factor = assemble(zero).factor;
  const std::size_t nb = k * k;

  auto factor_of = [&](const Matrix& b) -> std::optional<Matrix> {
    try {
      return assemble(with_b(zero, b)).factor;
    } catch (const InvalidCovariance&) {
      return std::nullopt;
    }
  };

  ProbeReport report;
  const RngStream final_stream = rng.child(0xF17A1);
  report.mu_zero = crn_outputs({zero_factor}, f, g, {{{0, 1.0}}}, opt.final_samples, final_stream, exec).front();

  for (std::size_t rs = 0; rs < opt.restarts; ++rs) {
    ProbeRestart run;
    RngStream start_rng = rng.child(2 * rs);
    Matrix b(k, k);
    for (int attempt = 0;; ++attempt) {
      require(attempt < 1000, "probe_minimum: could not sample a feasible start");
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
          b(i, j) = opt.init_scale * std::sqrt(a(i, i) * c(j, j)) * start_rng.uniform(-1.0, 1.0);
      if (factor_of(b)) break;
    }
    run.start = b;
    run.trajectory.push_back(b);

    Matrix average(k, k);
    std::size_t averaged = 0;
    const RngStream step_root = rng.child(2 * rs + 1);
    for (std::size_t t = 0; t < opt.steps; ++t) {
      std::vector<Matrix> factors;
      std::vector<LinearOutput> outputs;
      for (std::size_t coord = 0; coord < nb; ++coord) {
        double h = opt.fd_step;
        std::optional<Matrix> fp, fm;
        for (int shrink = 0; shrink < 30; ++shrink, h *= 0.5) {
          fp = factor_of(add_scaled(b, unit_perturbation(k, coord, 1.0), h));
          fm = factor_of(add_scaled(b, unit_perturbation(k, coord, 1.0), -h));
          if (fp && fm) break;
        }
        if (!fp || !fm) throw InvalidCovariance("probe_minimum: no feasible finite-difference step");
        factors.push_back(std::move(*fp));
        factors.push_back(std::move(*fm));
        outputs.push_back({{2 * coord, 0.5 / h}, {2 * coord + 1, -0.5 / h}});
      }
      const auto grad = crn_outputs(factors, f, g, outputs, opt.samples, step_root.child(t), exec);

      double rate = opt.learning_rate / std::sqrt(1.0 + static_cast<double>(t));
      for (int shrink = 0; shrink < 30; ++shrink, rate *= 0.5) {
        Matrix candidate(b);
        for (std::size_t coord = 0; coord < nb; ++coord) candidate(coord / k, coord % k) -= rate * grad[coord].mean;
        if (factor_of(candidate)) {
          b = std::move(candidate);
          break;
        }
      }
      run.trajectory.push_back(b);
      if (2 * (t + 1) > opt.steps) {
        average = add_scaled(average, b, 1.0);
        ++averaged;
      }
    }
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) average(i, j) /= static_cast<double>(averaged);
    run.argmin = average;

    // Paired estimate of mu(argmin) - mu(0) on the shared final stream.
    const auto argmin_factor = factor_of(run.argmin);
    require(argmin_factor.has_value(), "probe_minimum: averaged iterate left the feasible set");
    const auto est = crn_outputs({*argmin_factor, zero_factor}, f, g, {{{0, 1.0}}, {{0, 1.0}, {1, -1.0}}},
                                 opt.final_samples, final_stream, exec);
    run.mu = est[0];
    run.margin = est[1].mean;
    run.margin_se = est[1].std_error;
    report.restarts.push_back(std::move(run));
  }

  for (std::size_t i = 1; i < report.restarts.size(); ++i)
    if (report.restarts[i].mu.mean < report.restarts[report.best].mu.mean) report.best = i;

  std::ostringstream verdict;
  for (std::size_t i = 0; i < report.restarts.size(); ++i) {
    const auto& run = report.restarts[i];
    if (run.margin < -3.0 * run.margin_se) {
      report.candidate_violation = true;
      verdict << "candidate violation found (restart " << i << ", margin " << run.margin << ", se "
              << run.margin_se << ", seed " << rng.seed() << ")";
      break;
    }
  }
  if (!report.candidate_violation) verdict << "consistent with global minimum at 0";
  report.verdict = verdict.str();
  return report;
}

}  // namespace corrlab
