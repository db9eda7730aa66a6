#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "corrlab/parallel.hpp"
#include "corrlab/posdef_catalog.hpp"
#include "corrlab/stable_model.hpp"
#include "corrlab/stats.hpp"

namespace corrlab {

enum class GapMethod { exact, monte_carlo };

const char* to_string(GapMethod m);

/// E[f g], E[f], E[g] and the gap E[fg] - E[f]E[g] for f on (X_1..X_m) and
/// g on (X_{m+1}..X_k). Exact reports carry zero standard errors.
struct GapReport {
  GapMethod method = GapMethod::exact;
  McEstimate e_fg;
  McEstimate e_f;
  McEstimate e_g;
  McEstimate gap;
  /// Lower bound the gap was checked against (-1e-10 f(0)g(0) or -3 SE).
  double threshold = 0.0;
  bool positive_definite = true;
  bool pass = true;

  std::string fixture_id;
  std::size_t split = 0;
  std::uint64_t seed = 0;
};

/// E f(X_{offset+1}..X_{offset+m}) = sum_p a_p phi(sum_j (t_p)_j xi_{offset+j}).
double exact_expectation(const StableModel& model, const Functionals& xi, const CosinePolynomial& f,
                         std::size_t offset = 0);

/// Exact finite-sum gap for cosine polynomials.
GapReport correlation_gap_exact(const StableModel& model, const Functionals& xi, std::size_t split,
                                const CosinePolynomial& f, const CosinePolynomial& g);

enum class AtomLayout { symmetrized, one_sided };

struct SymmetryPair {
  double plus = 0.0;   ///< I1: phi(alpha + beta)
  double minus = 0.0;  ///< I2: phi(alpha - beta)
};

/// I1 and I2 over the Bochner atoms of f (always symmetrized) and g (laid
/// out as requested).
SymmetryPair i1_i2_symmetry(const StableModel& model, const Functionals& xi, std::size_t split,
                            const CosinePolynomial& f, const CosinePolynomial& g,
                            AtomLayout g_layout = AtomLayout::symmetrized);

/// Monte Carlo gap from one shared sample set (common random numbers); the
/// gap's standard error is the delta-method error over the joint moments.
GapReport correlation_gap_mc(const StableModel& model, const Functionals& xi, std::size_t split,
                             const CatalogFunction& f, const CatalogFunction& g,
                             std::size_t n_samples, const RngStream& rng, Execution exec = {});

/// Random cosine-polynomial gap fixture for property sweeps.
struct GapFixture {
  StableModel model;
  Functionals xi;
  std::size_t split;
  CosinePolynomial f;
  CosinePolynomial g;
};

GapFixture random_gap_fixture(RngStream& rng, double q);

std::string csv_header();
std::string csv_row(const GapReport& r);

}  // namespace corrlab
