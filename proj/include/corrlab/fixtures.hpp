#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "corrlab/bodies.hpp"
#include "corrlab/posdef_catalog.hpp"
#include "corrlab/stable_model.hpp"

namespace corrlab {

/// A complete input for correlation_gap_mc.
struct McFixture {
  std::string id;
  StableModel model;
  Functionals xi;
  std::size_t split;
  CatalogFunction f;
  CatalogFunction g;
};

/// Correlated model with `atoms` Gaussian atoms in R^n and k Gaussian
/// functionals of norm ~1, generated from a fixed stream per index.
std::pair<StableModel, Functionals> stock_correlated_model(double q, std::size_t n, std::size_t k,
                                                           std::size_t atoms, std::size_t index);

/// Triangle products, k = 4, m = 2, Gaussian (q = 2) models.
std::vector<McFixture> triangle_product_fixtures(std::size_t count);

/// exp(-|x_i|^{q_i}) products with q_i cycling through {0.7, 1.3, 2}, on a
/// q = 1.5 stable model, k = 4, m = 2.
std::vector<McFixture> stretched_exp_fixtures(std::size_t count);

/// Cosine-polynomial fixtures for exact-vs-MC cross validation.
std::vector<McFixture> cosine_fixtures(std::size_t count);

struct BodyPair {
  std::string id;
  ConvexBody f;
  ConvexBody g;
};

/// k = 2 pairs: equal unit boxes, unit box vs rotated square, unit disk vs unit box.
std::vector<BodyPair> stock_body_pairs_2d();

}  // namespace corrlab
