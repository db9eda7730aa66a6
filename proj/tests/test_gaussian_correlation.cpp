#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "corrlab/error.hpp"
#include "corrlab/gaussian_correlation.hpp"
#include "corrlab/special.hpp"

namespace corrlab {
namespace {

constexpr double kPi = std::numbers::pi;

const ConvexBody kUnitDisk = ConvexBody::ball(2);

double bivariate_density(double x, double y, double r) {
  const double s = 1.0 - r * r;
  return std::exp(-(x * x - 2.0 * r * x * y + y * y) / (2.0 * s)) / (2.0 * kPi * std::sqrt(s));
}

// Independent route to P(|X|<a, |Y|<a): Plackett's identity dP/drho equals the
// signed sum of corner densities, integrated from the independent value.
double plackett_box_probability(double rho, double a) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const double base = std::pow(std::erf(a / std::sqrt(2.0)), 2);
  if (rho == 0.0) return base;
  auto d = [a](double r) { return 2.0 * (bivariate_density(a, a, r) - bivariate_density(a, -a, r)); };
  return base + ts.integrate(d, 0.0, rho);
}

Matrix scalar_b(double rho) {
  Matrix b(1, 1);
  b(0, 0) = rho;
  return b;
}

CovarianceBlocks k1_blocks(double rho) { return {SymMatrix::identity(1), SymMatrix::identity(1), scalar_b(rho)}; }

TEST(Assemble, ReferenceValues) {
  const auto a = assemble(CovarianceBlocks::identity(3));
  EXPECT_EQ(a.matrix, SymMatrix::identity(6));
  EXPECT_EQ(a.factor, Matrix::identity(6));
  for (double rho : {-0.999, -0.5, 0.0, 0.7, 0.999}) EXPECT_TRUE(is_feasible(k1_blocks(rho))) << rho;
  for (double rho : {-1.2, -1.0, 1.0, 1.5}) {
    EXPECT_FALSE(is_feasible(k1_blocks(rho))) << rho;
    EXPECT_THROW(assemble(k1_blocks(rho)), InvalidCovariance) << rho;
  }
  try {
    assemble(k1_blocks(1.0));
  } catch (const InvalidCovariance& e) {
    EXPECT_NE(std::string(e.what()).find("invalid B"), std::string::npos);
  }
  CovarianceBlocks bad = CovarianceBlocks::identity(2);
  bad.a = SymMatrix::from_rows({{1, 2}, {2, 1}});
  EXPECT_THROW(assemble(bad), InvalidArgument);
}

TEST(BoxProbability2d, ReferenceValues) {
  EXPECT_NEAR(box_probability_2d(0.0, 1.0), 0.4660649, 5e-8);
  EXPECT_NEAR(box_probability_2d(0.0, 1.0), std::pow(2.0 * normal_cdf(1.0) - 1.0, 2), 1e-12);
  const double limit = 2.0 * normal_cdf(1.0) - 1.0;
  EXPECT_NEAR(limit, 0.6826895, 5e-8);
  // The approach to the limit is O(sqrt(1 - rho)).
  EXPECT_NEAR(box_probability_2d(1.0 - 1e-12, 1.0), limit, 1e-5);
  EXPECT_NEAR(box_probability_2d(-1.0 + 1e-12, 1.0), limit, 1e-5);
  for (double rho : {0.1, 0.45, 0.93}) EXPECT_EQ(box_probability_2d(rho, 1.3), box_probability_2d(-rho, 1.3));
  EXPECT_THROW(box_probability_2d(1.0, 1.0), InvalidArgument);
  EXPECT_THROW(box_probability_2d(-1.5, 1.0), InvalidArgument);
}

TEST(BoxProbability2d, MatchesPlackettOracle) {
  for (double a : {0.5, 1.0, 2.0})
    for (double rho : {-0.95, -0.6, -0.2, 0.05, 0.3, 0.8, 0.98})
      EXPECT_NEAR(box_probability_2d(rho, a), plackett_box_probability(rho, a), 1e-10) << a << " " << rho;
}

TEST(ProductMeasureMc, ReferenceValues) {
  const auto box = ConvexBody::unit_box(1);
  const auto zero = product_measure_mc(k1_blocks(0.0), box, box, 400000, RngStream(1, 0));
  EXPECT_NEAR(zero.mean, 0.4660649, 3.0 * zero.std_error);
  const auto half = product_measure_mc(k1_blocks(0.5), box, box, 400000, RngStream(1, 1));
  EXPECT_NEAR(half.mean, box_probability_2d(0.5, 1.0), 3.0 * half.std_error);
  const auto huge = ConvexBody::ball(2, 1e6);
  const auto all = product_measure_mc(CovarianceBlocks::identity(2), huge, huge, 10000, RngStream(1, 2));
  EXPECT_EQ(all.mean, 1.0);
  EXPECT_THROW(product_measure_mc(k1_blocks(1.0), box, box, 1000, RngStream(1, 3)), InvalidCovariance);
}

TEST(ProductMeasureMc, SerialAndParallelBitIdentical) {
  const auto f = ConvexBody::unit_box(2);
  const auto g = ConvexBody::rotated_square();
  const auto blocks = CovarianceBlocks::scaled_identity(2, 0.4);
  const auto a = product_measure_mc(blocks, f, g, 100000, RngStream(2, 0), {1});
  for (int w : {0, 2, 3}) {
    const auto b = product_measure_mc(blocks, f, g, 100000, RngStream(2, 0), {w});
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
  }
}

TEST(Theta, ReferenceValues) {
  EXPECT_EQ(theta(0.0), 0.0);
  EXPECT_NEAR(theta(1.0), -1.2130613, 5e-8);
  EXPECT_NEAR(theta(1.0), -2.0 * std::exp(-0.5), 1e-15);
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double a : {0.5, 1.0, 2.0, 4.0}) {
    const double q = ts.integrate([](double x) { return (x * x - 1.0) * std::exp(-0.5 * x * x); }, -a, a);
    EXPECT_NEAR(theta(a), q, 1e-10) << a;
    EXPECT_LT(theta(a), 0.0);
  }
}

TEST(GaussMass, MatchesQuadrature) {
  EXPECT_NEAR(gauss_mass(1.0), 1.7112487, 1e-7);  // printed value is truncated
  boost::math::quadrature::tanh_sinh<double> ts;
  EXPECT_NEAR(gauss_mass(2.3), ts.integrate([](double x) { return std::exp(-0.5 * x * x); }, -2.3, 2.3), 1e-12);
}

TEST(BoxCurvature, ClosedForms) {
  const auto l1 = box_curvature(Box{{1.0}});
  EXPECT_NEAR(l1(0, 0), -1.2130613, 5e-8);
  const auto l3 = box_curvature(Box{{1.0, 0.5, 2.0}});
  EXPECT_DOUBLE_EQ(l3(0, 0), theta(1.0) * gauss_mass(0.5) * gauss_mass(2.0));
  EXPECT_DOUBLE_EQ(l3(1, 1), theta(0.5) * gauss_mass(1.0) * gauss_mass(2.0));
  EXPECT_EQ(l3(0, 1), 0.0);
  EXPECT_EQ(l3(2, 0), 0.0);
  EXPECT_NEAR(box_curvature(Box{{1.0, 1.0}})(0, 0), -1.2130613 * 1.7112487, 3e-7);
}

TEST(HessianAtZero, UnitBoxMatchesClosedForm) {
  for (std::size_t k : {1u, 2u, 3u}) {
    const auto box = ConvexBody::unit_box(k);
    const auto r = hessian_at_zero(box, box, 400000, RngStream(3, k));
    EXPECT_DOUBLE_EQ(r.prefactor, std::pow(2.0 * kPi, -static_cast<double>(k)));
    ASSERT_TRUE(r.l.closed_form.has_value());
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t m = 0; m <= i; ++m)
        EXPECT_NEAR(r.l.value(i, m), (*r.l.closed_form)(i, m), 3.0 * r.l.std_error(i, m)) << k << i << m;
    EXPECT_LE(r.l.max_closed_form_z, 3.0);
    EXPECT_TRUE(r.l.negative_definite);
    EXPECT_TRUE(r.k_block.negative_definite);
    EXPECT_TRUE(r.local_minimum_consistent);
  }
}

TEST(HessianAtZero, UnitDiskMatchesDerivedValue) {
  // L = int_disk (x_i x_m - delta) e^{-|x|^2/2} dx = -pi e^{-1/2} I in polar coordinates.
  const auto r = hessian_at_zero(kUnitDisk, kUnitDisk, 400000, RngStream(4, 0));
  const double expected = -kPi * std::exp(-0.5);
  EXPECT_FALSE(r.l.closed_form.has_value());
  EXPECT_NEAR(r.l.value(0, 0), expected, 3.0 * r.l.std_error(0, 0));
  EXPECT_NEAR(r.l.value(1, 1), expected, 3.0 * r.l.std_error(1, 1));
  EXPECT_NEAR(r.l.value(1, 0), 0.0, 3.0 * r.l.std_error(1, 0));
  EXPECT_TRUE(r.local_minimum_consistent);
}

TEST(HessianAtZero, RejectsUnboundedBody) {
  const auto slab = ConvexBody::slabs({{1.0, 0.0}});
  EXPECT_FALSE(slab.bounded());
  EXPECT_THROW(hessian_at_zero(slab, ConvexBody::unit_box(2), 1000, RngStream(1, 0)), InvalidArgument);
}

TEST(HessianFd, OracleSecondDifferenceIsKroneckerValue) {
  const double expected = 4.0 * std::exp(-1.0) / (2.0 * kPi);
  EXPECT_NEAR(expected, 0.234198, 2e-6);  // printed value is truncated (exact 0.2341993)
  EXPECT_NEAR(theta(1.0) * theta(1.0) / (2.0 * kPi), expected, 1e-15);
  EXPECT_NEAR(box_oracle_second_difference(1.0, 1e-3), expected, 1e-6);
  for (double a : {0.5, 2.0})
    EXPECT_NEAR(box_oracle_second_difference(a, 1e-3), theta(a) * theta(a) / (2.0 * kPi), 1e-6) << a;
}

TEST(HessianFd, GradientVanishesAtZero) {
  for (std::size_t k : {1u, 2u}) {
    const auto box = ConvexBody::unit_box(k);
    const auto r = hessian_fd(box, box, 1e-2, 200000, RngStream(5, k));
    ASSERT_EQ(r.gradient.size(), k * k);
    for (const auto& g : r.gradient) EXPECT_LE(std::abs(g.mean), 3.0 * g.std_error);
    EXPECT_TRUE(r.gradient_vanishes);
    ASSERT_EQ(r.analytic_diagonal.size(), k * k);
    EXPECT_GT(r.analytic_diagonal[0], 0.0);
  }
}

TEST(HessianFd, LargeStepDiagonalIsPositive) {
  // At h = 0.1 the second differences resolve the curvature above MC noise.
  const auto box = ConvexBody::unit_box(1);
  const auto r = hessian_fd(box, box, 0.1, 1000000, RngStream(6, 0));
  EXPECT_TRUE(r.diagonal_positive);
  EXPECT_NEAR(r.hessian(0, 0), box_oracle_second_difference(1.0, 0.1), 3.0 * r.hessian_std_error(0, 0));
}

TEST(HessianFd, RejectsStepOutsideFeasibleSet) {
  const auto box = ConvexBody::unit_box(1);
  EXPECT_THROW(hessian_fd(box, box, 1.0, 1000, RngStream(1, 0)), InvalidArgument);
  EXPECT_THROW(hessian_fd(box, box, 0.0, 1000, RngStream(1, 0)), InvalidArgument);
}

TEST(MarginalPhi, OneDimensionalIsIndicator) {
  const auto r = marginal_phi(ConvexBody::unit_box(1), symmetric_grid(1.5, 7), 1000, RngStream(7, 0));
  for (const auto& p : r.points) {
    EXPECT_EQ(p.phi.mean, std::abs(p.x) <= 1.0 ? 1.0 : 0.0) << p.x;
    EXPECT_EQ(p.phi.std_error, 0.0);
  }
  EXPECT_TRUE(r.ok());
}

TEST(MarginalPhi, UnitSquareIsConstantOnSlab) {
  const auto r = marginal_phi(ConvexBody::unit_box(2), symmetric_grid(0.9, 7), 200000, RngStream(7, 1));
  for (const auto& p : r.points) EXPECT_NEAR(p.phi.mean, gauss_mass(1.0), 3.0 * p.phi.std_error) << p.x;
  EXPECT_TRUE(r.ok());
}

TEST(MarginalPhi, UnitDiskChordProfile) {
  const auto grid = symmetric_grid(1.0, 21);
  const auto r = marginal_phi(kUnitDisk, grid, 200000, RngStream(7, 2));
  for (const auto& p : r.points) {
    const double half_chord = std::sqrt(std::max(0.0, 1.0 - p.x * p.x));
    EXPECT_NEAR(p.phi.mean, gauss_mass(half_chord), 3.0 * p.phi.std_error + 1e-15) << p.x;
  }
  auto at = [&](double x) {
    for (const auto& p : r.points)
      if (std::abs(p.x - x) < 1e-12) return p.phi;
    return McEstimate{};
  };
  const auto p0 = at(0.0), p5 = at(0.5), p9 = at(0.9);
  EXPECT_GT(p0.mean - p5.mean, 3.0 * std::hypot(p0.std_error, p5.std_error));
  EXPECT_GT(p5.mean - p9.mean, 3.0 * std::hypot(p5.std_error, p9.std_error));
  EXPECT_TRUE(r.even);
  EXPECT_TRUE(r.monotone);
  EXPECT_TRUE(r.log_concave);
}

TEST(MarginalPhi, RejectsUnboundedBody) {
  EXPECT_THROW(marginal_phi(ConvexBody::slabs({{1.0, 0.0}}), symmetric_grid(1.0, 5), 1000, RngStream(1, 0)),
               InvalidArgument);
}

TEST(SymmetricGrid, ExactMirror) {
  const auto g = symmetric_grid(0.98, 41);
  ASSERT_EQ(g.size(), 41u);
  EXPECT_EQ(g.front(), -0.98);
  EXPECT_EQ(g[20], 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g[i], -g[g.size() - 1 - i]);
}

TEST(LambdaLimit, FactorizationAndEqualBodies) {
  const auto box = ConvexBody::unit_box(1);
  const auto r = lambda_limit(box, box, {0.0, 0.5, 0.9, 0.99}, 400000, RngStream(8, 0));
  ASSERT_TRUE(r.factorization_gap.has_value());
  EXPECT_LE(*r.factorization_gap, 3.0 * *r.factorization_se);
  EXPECT_NEAR(r.rows[0].mu.mean, 0.4660649, 3.0 * r.rows[0].mu.std_error);
  EXPECT_NEAR(r.nu_intersection.mean, 0.6826895, 3.0 * r.nu_intersection.std_error);
  // Each row agrees with the deterministic oracle.
  for (const auto& row : r.rows)
    EXPECT_NEAR(row.mu.mean, box_probability_2d(row.lambda, 1.0), 3.0 * row.mu.std_error) << row.lambda;
}

TEST(LambdaLimit, ApproachesIntersectionAtSqrtRate) {
  // The distance to nu(F cap G) shrinks like sqrt(1 - lambda) along the
  // deterministic k = 1 oracle; the ratio between lambda = 0.99 and 0.9999 is 10.
  const double limit = 2.0 * normal_cdf(1.0) - 1.0;
  const double d2 = limit - box_probability_2d(0.99, 1.0);
  const double d4 = limit - box_probability_2d(0.9999, 1.0);
  EXPECT_GT(d2, 0.0);
  EXPECT_NEAR(d2 / d4, 10.0, 0.2);
}

TEST(LambdaLimit, RejectsLambdaAtOne) {
  const auto box = ConvexBody::unit_box(2);
  EXPECT_THROW(lambda_limit(box, box, {0.0, 1.0}, 1000, RngStream(1, 0)), InvalidArgument);
}

TEST(RegularizeRank, ReferenceValues) {
  const Functionals dup({{1.0, 0.0}, {1.0, 0.0}});
  const auto r = regularize_rank(dup, 0.1);
  EXPECT_EQ(r.input_rank, 1u);
  EXPECT_EQ(r.output_rank, 2u);
  EXPECT_FALSE(r.degenerate);
  EXPECT_EQ(numerical_rank(r.vectors.vectors()), 2u);

  const auto passthrough = regularize_rank(dup, 0.0);
  EXPECT_EQ(passthrough.output_rank, 1u);
  EXPECT_TRUE(passthrough.degenerate);

  const Functionals indep({{1.0, 0.5}, {-0.3, 2.0}});
  const auto g0 = gram_matrix(indep);
  for (double eps : {1e-2, 1e-4}) {
    const auto g = gram_matrix(regularize_rank(indep, eps).vectors);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        EXPECT_NEAR(g[i][j], g0[i][j], i == j ? 2.0 * eps * eps : 1e-15) << eps;
  }
}

TEST(RegularizeRank, FullRankOutputForRandomDependentInput) {
  RngStream rng(9, 0);
  // Four vectors in R^3 spanning a plane.
  const std::vector<double> u = {rng.normal(), rng.normal(), rng.normal()};
  const std::vector<double> v = {rng.normal(), rng.normal(), rng.normal()};
  std::vector<std::vector<double>> vecs;
  for (int i = 0; i < 4; ++i) {
    const double a = rng.normal(), b = rng.normal();
    vecs.push_back({a * u[0] + b * v[0], a * u[1] + b * v[1], a * u[2] + b * v[2]});
  }
  const auto r = regularize_rank(Functionals(vecs), 0.05);
  EXPECT_EQ(r.input_rank, 2u);
  EXPECT_EQ(r.vectors.dim(), 4u);
  EXPECT_EQ(r.output_rank, 4u);
}

TEST(ProbeMinimum, OneDimensionalBoxesLandNearZero) {
  const auto box = ConvexBody::unit_box(1);
  ProbeOptions opt;
  opt.samples = 50000;
  opt.final_samples = 200000;
  opt.steps = 30;
  opt.restarts = 3;
  const auto r = probe_minimum(box, box, SymMatrix::identity(1), SymMatrix::identity(1), opt, RngStream(10, 0));
  ASSERT_EQ(r.restarts.size(), 3u);
  EXPECT_LE(std::abs(r.restarts[r.best].argmin(0, 0)), 0.05);
  EXPECT_FALSE(r.candidate_violation);
  EXPECT_NE(r.verdict.find("consistent"), std::string::npos);
}

TEST(ProbeMinimum, SameSeedSameTrajectory) {
  const auto box = ConvexBody::unit_box(2);
  ProbeOptions opt;
  opt.samples = 5000;
  opt.final_samples = 5000;
  opt.steps = 5;
  opt.restarts = 2;
  const auto a = probe_minimum(box, box, SymMatrix::identity(2), SymMatrix::identity(2), opt, RngStream(11, 0), {1});
  const auto b = probe_minimum(box, box, SymMatrix::identity(2), SymMatrix::identity(2), opt, RngStream(11, 0), {3});
  ASSERT_EQ(a.restarts.size(), b.restarts.size());
  for (std::size_t i = 0; i < a.restarts.size(); ++i) {
    EXPECT_EQ(a.restarts[i].start, b.restarts[i].start);
    EXPECT_EQ(a.restarts[i].trajectory, b.restarts[i].trajectory);
    EXPECT_EQ(a.restarts[i].margin, b.restarts[i].margin);
    for (const auto& bm : a.restarts[i].trajectory) EXPECT_TRUE(is_feasible({SymMatrix::identity(2), SymMatrix::identity(2), bm}));
  }
}

TEST(ProbeMinimum, OracleScanIncreasesWithAbsRho) {
  double prev = box_probability_2d(0.0, 1.0);
  for (double rho = 0.05; rho < 0.99; rho += 0.05) {
    const double p = box_probability_2d(rho, 1.0);
    EXPECT_GT(p, prev) << rho;
    prev = p;
  }
}

TEST(ConvexBodies, SymmetricAndConvexOnProbes) {
  RngStream rng(12, 0);
  const std::vector<ConvexBody> bodies = {ConvexBody::box({1.0, 0.3, 2.0}),
                                          ConvexBody::ellipsoid(SymMatrix::from_rows({{2, 0.5, 0}, {0.5, 1, 0.2}, {0, 0.2, 3}})),
                                          ConvexBody::slabs({{1, 0, 0}, {0.5, 1, 0}, {0, 0.3, 1}, {1, 1, 1}})};
  for (const auto& b : bodies) {
    EXPECT_TRUE(b.bounded());
    for (int i = 0; i < 3000; ++i) {
      std::vector<double> x(3), y(3), neg(3), mid(3);
      for (int c = 0; c < 3; ++c) {
        x[c] = rng.normal();
        y[c] = rng.normal();
        neg[c] = -x[c];
        mid[c] = 0.5 * (x[c] + y[c]);
      }
      ASSERT_EQ(b.contains(x), b.contains(neg)) << b.describe();
      if (b.contains(x) && b.contains(y)) {
        ASSERT_TRUE(b.contains(mid)) << b.describe();
      }
    }
  }
  const double corner[] = {1.0, 0.3, 2.0};
  EXPECT_TRUE(bodies[0].contains(corner));
  EXPECT_EQ(numerical_rank({{1, 0}, {2, 0}}), 1u);
  EXPECT_THROW(ConvexBody::box({1.0, -1.0}), InvalidArgument);
  EXPECT_THROW(ConvexBody::ellipsoid(SymMatrix::from_rows({{1, 2}, {2, 1}})), InvalidArgument);
}

}  // namespace
}  // namespace corrlab
