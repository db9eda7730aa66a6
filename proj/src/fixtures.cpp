#include "corrlab/fixtures.hpp"

#include <cmath>

#include "corrlab/correlation.hpp"

namespace corrlab {
namespace {

constexpr std::uint64_t kFixtureSeed = 0xC0FFEE;

}  // namespace

std::pair<StableModel, Functionals> stock_correlated_model(double q, std::size_t n, std::size_t k,
                                                           std::size_t atoms, std::size_t index) {
  RngStream rng(kFixtureSeed, index);
  StableModel model = random_stable_model(rng, q, n, atoms);
  std::vector<std::vector<double>> rows(k, std::vector<double>(n));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& row : rows)
    for (double& x : row) x = scale * rng.normal();
  return {std::move(model), Functionals(std::move(rows))};
}

std::vector<McFixture> triangle_product_fixtures(std::size_t count) {
  std::vector<McFixture> out;
  for (std::size_t i = 0; i < count; ++i) {
    auto [model, xi] = stock_correlated_model(2.0, 4, 4, 3, 100 + i);
    ProductFunction tri({Triangle{}, Triangle{}});
    out.push_back({"triangle-" + std::to_string(i), std::move(model), std::move(xi), 2, tri, tri});
  }
  return out;
}

std::vector<McFixture> stretched_exp_fixtures(std::size_t count) {
  const double qs[3] = {0.7, 1.3, 2.0};
  std::vector<McFixture> out;
  for (std::size_t i = 0; i < count; ++i) {
    auto [model, xi] = stock_correlated_model(1.5, 4, 4, 3, 200 + i);
    ProductFunction f({StretchedExp{qs[i % 3]}, StretchedExp{qs[(i + 1) % 3]}});
    ProductFunction g({StretchedExp{qs[(i + 2) % 3]}, StretchedExp{qs[i % 3]}});
    out.push_back({"stretched-exp-" + std::to_string(i), std::move(model), std::move(xi), 2, f, g});
  }
  return out;
}

std::vector<McFixture> cosine_fixtures(std::size_t count) {
  const double qs[4] = {0.5, 1.0, 1.5, 2.0};
  std::vector<McFixture> out;
  for (std::size_t i = 0; i < count; ++i) {
    RngStream rng(kFixtureSeed, 300 + i);
    auto fx = random_gap_fixture(rng, qs[i % 4]);
    out.push_back({"cosine-" + std::to_string(i), std::move(fx.model), std::move(fx.xi), fx.split,
                   std::move(fx.f), std::move(fx.g)});
  }
  return out;
}

std::vector<BodyPair> stock_body_pairs_2d() {
  return {{"box-box", ConvexBody::unit_box(2), ConvexBody::unit_box(2)},
          {"box-rotated", ConvexBody::unit_box(2), ConvexBody::rotated_square()},
          {"disk-box", ConvexBody::ball(2), ConvexBody::unit_box(2)}};
}

}  // namespace corrlab
