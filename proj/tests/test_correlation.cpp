#include <gtest/gtest.h>

#include <cmath>

#include "corrlab/correlation.hpp"
#include "corrlab/error.hpp"
#include "corrlab/fixtures.hpp"

namespace corrlab {
namespace {

const Functionals kIdentity2({{1.0, 0.0}, {0.0, 1.0}});

CosinePolynomial cos1(double t, double mass = 1.0) { return CosinePolynomial(1, {{mass, {t}}}); }

TEST(ExactExpectation, ReferenceValues) {
  RngStream rng(1, 0);
  const auto model = random_stable_model(rng, 1.3, 3, 4);
  const auto xi = random_functionals(rng, 2, 3);
  EXPECT_EQ(exact_expectation(model, xi, CosinePolynomial::constant(2, 1.0)), 1.0);
  for (double q : {0.5, 1.0, 1.5, 2.0}) {
    const StableModel unit(q, {{1.0, {1.0, 0.0}}});
    const Functionals e1({{1.0, 0.0}});
    for (double t : {0.4, 1.0, 2.5})
      EXPECT_NEAR(exact_expectation(unit, e1, cos1(t)), std::exp(-std::pow(t, q)), 1e-15);
  }
  EXPECT_THROW(exact_expectation(model, xi, CosinePolynomial::constant(3, 1.0)), InvalidArgument);
}

TEST(CorrelationGapExact, ConstantGIsZero) {
  RngStream rng(2, 0);
  for (int i = 0; i < 20; ++i) {
    auto fx = random_gap_fixture(rng, 1.0);
    const auto g = CosinePolynomial::constant(fx.xi.count() - fx.split, 1.0);
    EXPECT_EQ(correlation_gap_exact(fx.model, fx.xi, fx.split, fx.f, g).gap.mean, 0.0);
  }
}

TEST(CorrelationGapExact, DisjointSupportsAreIndependent) {
  for (double q : {0.5, 1.0, 2.0}) {
    const StableModel model(q, {{0.3, {1.0, 0.0}}, {0.7, {0.0, 2.0}}});
    const auto r = correlation_gap_exact(model, kIdentity2, 1, cos1(1.3, 0.6), cos1(0.7, 2.0));
    EXPECT_NEAR(r.gap.mean, 0.0, 1e-12);
    EXPECT_EQ(r.method, GapMethod::exact);
    EXPECT_EQ(r.gap.std_error, 0.0);
  }
}

TEST(CorrelationGapExact, GapIsDifferenceOfParts) {
  RngStream rng(3, 0);
  auto fx = random_gap_fixture(rng, 1.5);
  const auto r = correlation_gap_exact(fx.model, fx.xi, fx.split, fx.f, fx.g);
  EXPECT_EQ(r.gap.mean, r.e_fg.mean - r.e_f.mean * r.e_g.mean);
  // E[fg] agrees with I1, the symmetrized double sum over the Bochner atoms.
  const auto sym = i1_i2_symmetry(fx.model, fx.xi, fx.split, fx.f, fx.g);
  EXPECT_NEAR(r.e_fg.mean, sym.plus, 1e-13 * fx.f.at_origin() * fx.g.at_origin());
  EXPECT_EQ(r.e_f.mean, exact_expectation(fx.model, fx.xi, fx.f));
  EXPECT_EQ(r.e_g.mean, exact_expectation(fx.model, fx.xi, fx.g, fx.split));
}

TEST(CorrelationGapExact, RejectsBadSplit) {
  const StableModel model(1.0, {{1.0, {1.0, 1.0}}});
  EXPECT_THROW(correlation_gap_exact(model, kIdentity2, 0, CosinePolynomial::constant(0 + 1, 1.0), cos1(1.0)),
               InvalidArgument);
  EXPECT_THROW(correlation_gap_exact(model, kIdentity2, 2, cos1(1.0), cos1(1.0)), InvalidArgument);
  EXPECT_THROW(correlation_gap_exact(model, kIdentity2, 1, CosinePolynomial::constant(2, 1.0), cos1(1.0)),
               InvalidArgument);
}

class ExactGapSweep : public ::testing::TestWithParam<double> {};

TEST_P(ExactGapSweep, ThousandRandomFixtures) {
  const double q = GetParam();
  double worst = INFINITY;
  double worst_sym = 0.0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    RngStream rng(31, t);
    const auto fx = random_gap_fixture(rng, q);
    const auto r = correlation_gap_exact(fx.model, fx.xi, fx.split, fx.f, fx.g);
    worst = std::min(worst, r.gap.mean / (fx.f.at_origin() * fx.g.at_origin()));
    const auto s = i1_i2_symmetry(fx.model, fx.xi, fx.split, fx.f, fx.g);
    worst_sym = std::max(worst_sym, std::abs(s.plus - s.minus) / std::abs(s.plus));
  }
  EXPECT_GE(worst, -1e-10);
  EXPECT_LE(worst_sym, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Q, ExactGapSweep, ::testing::Values(0.5, 1.0, 1.5, 2.0));

TEST(CorrelationGapExact, SpotCheckedAgainstMonteCarlo) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    RngStream rng(41, t);
    const double q = 0.5 + 0.15 * static_cast<double>(t);
    const auto fx = random_gap_fixture(rng, q);
    const auto exact = correlation_gap_exact(fx.model, fx.xi, fx.split, fx.f, fx.g);
    const auto mc = correlation_gap_mc(fx.model, fx.xi, fx.split, fx.f, fx.g, 100000, RngStream(42, t));
    EXPECT_NEAR(mc.gap.mean, exact.gap.mean, 3.0 * mc.gap.std_error) << "trial " << t;
  }
}

TEST(CorrelationGapExact, LinearInScale) {
  RngStream rng(5, 0);
  for (int i = 0; i < 50; ++i) {
    const auto fx = random_gap_fixture(rng, 0.9);
    const double base = correlation_gap_exact(fx.model, fx.xi, fx.split, fx.f, fx.g).gap.mean;
    EXPECT_EQ(correlation_gap_exact(fx.model, fx.xi, fx.split, fx.f.scaled(4.0), fx.g).gap.mean, 4.0 * base);
    EXPECT_NEAR(correlation_gap_exact(fx.model, fx.xi, fx.split, fx.f.scaled(3.0), fx.g).gap.mean, 3.0 * base,
                1e-14 * fx.f.at_origin() * fx.g.at_origin());
  }
}

TEST(I1I2Symmetry, ReferenceValues) {
  RngStream rng(6, 0);
  for (int i = 0; i < 20; ++i) {
    const auto fx = random_gap_fixture(rng, 1.2);
    const auto sym = i1_i2_symmetry(fx.model, fx.xi, fx.split, fx.f, fx.g);
    const auto one = i1_i2_symmetry(fx.model, fx.xi, fx.split, fx.f, fx.g, AtomLayout::one_sided);
    EXPECT_NEAR(sym.plus, sym.minus, 1e-12 * std::abs(sym.plus));
    EXPECT_NEAR(one.plus, one.minus, 1e-12 * std::abs(one.plus));
    EXPECT_NEAR(one.plus, sym.plus, 1e-12 * std::abs(sym.plus));
  }
  const StableModel model(1.0, {{1.0, {1.0, 1.0}}});
  const auto ones = i1_i2_symmetry(model, kIdentity2, 1, CosinePolynomial::constant(1, 1.0),
                                   CosinePolynomial::constant(1, 1.0));
  EXPECT_EQ(ones.plus, 1.0);
  EXPECT_EQ(ones.minus, 1.0);
}

TEST(CorrelationGapMc, ProductExamplesNonnegative) {
  auto fixtures = triangle_product_fixtures(5);
  for (auto& f : stretched_exp_fixtures(5)) fixtures.push_back(std::move(f));
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const auto& fx = fixtures[i];
    const auto r = correlation_gap_mc(fx.model, fx.xi, fx.split, fx.f, fx.g, 200000, RngStream(50, i));
    EXPECT_GE(r.gap.mean, -3.0 * r.gap.std_error) << fx.id;
    EXPECT_TRUE(r.positive_definite);
    EXPECT_EQ(r.method, GapMethod::monte_carlo);
  }
}

TEST(CorrelationGapMc, CosineFixturesAgreeWithExact) {
  const auto fixtures = cosine_fixtures(20);
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const auto& fx = fixtures[i];
    const auto& f = std::get<CosinePolynomial>(fx.f);
    const auto& g = std::get<CosinePolynomial>(fx.g);
    const auto exact = correlation_gap_exact(fx.model, fx.xi, fx.split, f, g);
    const auto mc = correlation_gap_mc(fx.model, fx.xi, fx.split, fx.f, fx.g, 100000, RngStream(60, i));
    EXPECT_NEAR(mc.gap.mean, exact.gap.mean, 3.0 * mc.gap.std_error) << fx.id;
  }
}

TEST(CorrelationGapMc, NonPositiveDefiniteProbeIsFlagged) {
  const auto [model, xi] = stock_correlated_model(2.0, 4, 4, 6, 1);
  const CatalogFunction h = CappedQuadratic{2, 10.0};
  const auto r = correlation_gap_mc(model, xi, 2, h, h, 50000, RngStream(70, 0));
  EXPECT_FALSE(r.positive_definite);
  EXPECT_TRUE(std::isfinite(r.gap.mean));
}

TEST(CorrelationGapMc, SerialAndParallelBitIdentical) {
  const auto fx = triangle_product_fixtures(1).front();
  const auto a = correlation_gap_mc(fx.model, fx.xi, fx.split, fx.f, fx.g, 50000, RngStream(80, 0), {1});
  const auto b = correlation_gap_mc(fx.model, fx.xi, fx.split, fx.f, fx.g, 50000, RngStream(80, 0), {4});
  EXPECT_EQ(a.gap.mean, b.gap.mean);
  EXPECT_EQ(a.gap.std_error, b.gap.std_error);
}

TEST(CorrelationGapMc, NonFiniteEvaluationNamesSample) {
  // At q = 0.005 the stable draws overflow, so f sees infinite arguments.
  const StableModel model(0.005, {{1.0, {1.0, 1.0}}});
  try {
    correlation_gap_mc(model, kIdentity2, 1, cos1(1.0), cos1(1.0), 20000, RngStream(90, 0), {1});
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_LT(e.sample_index(), 20000u);
  }
}

TEST(CorrelationGapMc, RejectsTooFewSamples) {
  const StableModel model(1.0, {{1.0, {1.0, 1.0}}});
  EXPECT_THROW(correlation_gap_mc(model, kIdentity2, 1, cos1(1.0), cos1(1.0), 10, RngStream(1, 0)), InvalidArgument);
}

TEST(GapCsv, HeaderAndRow) {
  EXPECT_EQ(csv_header(), "fixture_id,method,gap,se,pass");
  GapReport r;
  r.fixture_id = "x";
  r.method = GapMethod::monte_carlo;
  r.gap = {0.5, 0.25, 100};
  EXPECT_EQ(csv_row(r).substr(0, 14), "x,monte_carlo,");
}

}  // namespace
}  // namespace corrlab
