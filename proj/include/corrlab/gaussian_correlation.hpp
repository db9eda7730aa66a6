#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "corrlab/bodies.hpp"
#include "corrlab/linalg.hpp"
#include "corrlab/parallel.hpp"
#include "corrlab/stable_model.hpp"
#include "corrlab/stats.hpp"

namespace corrlab {

/// Block covariance [[A, B], [B^T, C]] with B the variable cross-covariance.
struct CovarianceBlocks {
  SymMatrix a;
  SymMatrix c;
  Matrix b;

  static CovarianceBlocks identity(std::size_t k);
  /// A = C = I, B = lambda I.
  static CovarianceBlocks scaled_identity(std::size_t k, double lambda);

  std::size_t k() const noexcept { return a.dim(); }
};

struct AssembledCovariance {
  SymMatrix matrix;  ///< 2k x 2k
  Matrix factor;     ///< Cholesky factor (the SPD certificate)
};

/// Throws InvalidArgument if A or C is not SPD, InvalidCovariance if the
/// assembled matrix is not SPD.
AssembledCovariance assemble(const CovarianceBlocks& blocks);

bool is_feasible(const CovarianceBlocks& blocks);

/// mu_B(F x G) by Monte Carlo. Draws are z ~ N(0, I_2k) mapped through the
/// Cholesky factor, so equal rng gives common random numbers across B.
McEstimate product_measure_mc(const CovarianceBlocks& blocks, const ConvexBody& f, const ConvexBody& g,
                              std::size_t n_samples, const RngStream& rng, Execution exec = {});

/// P(|X| < a, |Y| < a) for standard bivariate normals with correlation rho,
/// by adaptive quadrature of the conditional CDF.
double box_probability_2d(double rho, double a);

/// (P(h) - 2 P(0) + P(-h)) / h^2 for the 2-D box oracle.
double box_oracle_second_difference(double a, double h);

/// theta(a) = int_{-a}^{a} (x^2 - 1) e^{-x^2/2} dx = -2a e^{-a^2/2}.
double theta(double a);

/// c(a) = int_{-a}^{a} e^{-x^2/2} dx = sqrt(2 pi)(2 Phi(a) - 1).
double gauss_mass(double a);

/// (2 pi)^{-k}: H_{(i,j),(m,n)} = kappa L_{i,m} K_{j,n} at B = 0, A = C = I.
double hessian_prefactor(std::size_t k);

/// Closed form of L_{i,m} = int_F (x_i x_m - delta_im) e^{-|x|^2/2} dx for a box.
SymMatrix box_curvature(const Box& box);

/// MC estimate of L (or K) for one body with per-entry errors and
/// delta-method errors for the eigenvalues.
struct CurvatureEstimate {
  SymMatrix value;
  SymMatrix std_error;
  std::vector<double> eigenvalues;
  std::vector<double> eigenvalue_std_errors;
  std::optional<SymMatrix> closed_form;
  std::optional<std::vector<double>> closed_form_eigenvalues;
  /// max over entries of |MC - closed| / SE (0 without a closed form).
  double max_closed_form_z = 0.0;
  bool matches_closed_form = true;
  bool negative_definite = false;
};

CurvatureEstimate curvature_mc(const ConvexBody& body, std::size_t n_samples, const RngStream& rng,
                               Execution exec = {});

struct HessianReport {
  std::size_t k = 0;
  double prefactor = 0.0;  ///< kappa
  CurvatureEstimate l;
  CurvatureEstimate k_block;
  /// Every eigenvalue of L and K is below -3 SE.
  bool local_minimum_consistent = false;
};

HessianReport hessian_at_zero(const ConvexBody& f, const ConvexBody& g, std::size_t n_samples,
                              const RngStream& rng, Execution exec = {});

/// Central finite differences of B -> mu_B(F x G) at B = 0 (A = C = I), using
/// common random numbers at every probe point. Coordinate index a = i*k + j.
struct FdReport {
  std::size_t k = 0;
  double step = 0.0;
  std::vector<McEstimate> gradient;
  Matrix hessian;           ///< k^2 x k^2
  Matrix hessian_std_error; ///< k^2 x k^2
  std::vector<double> analytic_diagonal;  ///< kappa L_ii K_jj
  std::vector<double> diagonal_z;         ///< (fd - analytic) / SE
  bool gradient_vanishes = false;
  bool diagonal_positive = false;
};

FdReport hessian_fd(const ConvexBody& f, const ConvexBody& g, double step, std::size_t n_samples,
                    const RngStream& rng, Execution exec = {});

/// phi(x1) = int chi_F(x1, z) e^{-|z|^2/2} dz over z in R^{k-1}, with checks.
struct MarginalPoint {
  double x = 0.0;
  McEstimate phi;
};

struct MarginalReport {
  std::vector<MarginalPoint> points;
  bool even = false;
  bool monotone = false;
  bool log_concave = false;
  bool ok() const { return even && monotone && log_concave; }
};

/// Checks allow `z` standard errors of slack.
MarginalReport marginal_phi(const ConvexBody& f, const std::vector<double>& grid, std::size_t n_samples,
                            const RngStream& rng, Execution exec = {}, double z = 3.0);

std::vector<double> symmetric_grid(double half_width, std::size_t points);

struct LambdaRow {
  double lambda = 0.0;
  McEstimate mu;
};

struct LambdaLimitReport {
  std::vector<LambdaRow> rows;
  McEstimate nu_f;
  McEstimate nu_g;
  McEstimate nu_intersection;
  McEstimate nu_product;  ///< nu(F) nu(G), delta-method error
  /// |mu at the largest lambda - nu(F cap G)| and its combined SE.
  double limit_gap = 0.0;
  double limit_se = 0.0;
  bool limit_ok = false;
  /// |mu at lambda = 0 - nu(F)nu(G)| check (only when 0 is in the list).
  std::optional<double> factorization_gap;
  std::optional<double> factorization_se;
  bool factorization_ok = true;
  /// nu(F cap G) extrapolated from the last two rows assuming an error
  /// proportional to sqrt(1 - lambda). Diagnostic only.
  std::optional<double> sqrt_extrapolated_limit;
};

LambdaLimitReport lambda_limit(const ConvexBody& f, const ConvexBody& g, const std::vector<double>& lambdas,
                               std::size_t n_samples, const RngStream& rng, Execution exec = {});

/// Embeds K vectors of R^n (K >= n) into R^K and perturbs the dependent ones
/// by eps along mutually orthogonal directions orthogonal to all inputs.
struct RegularizedFunctionals {
  Functionals vectors;
  std::size_t input_rank = 0;
  std::size_t output_rank = 0;
  std::vector<std::size_t> perturbed;
  bool degenerate = false;  ///< eps == 0 and the input was rank deficient
};

RegularizedFunctionals regularize_rank(const Functionals& xi, double eps);

std::vector<std::vector<double>> gram_matrix(const Functionals& xi);

struct ProbeOptions {
  std::size_t steps = 40;
  std::size_t restarts = 4;
  std::size_t samples = 100000;        ///< per gradient evaluation
  std::size_t final_samples = 1000000; ///< for the paired margin estimate
  double fd_step = 0.05;
  double learning_rate = 3.0;
  double init_scale = 0.7;
};

struct ProbeRestart {
  Matrix start;
  Matrix argmin;  ///< Polyak average of the second half of the trajectory
  std::vector<Matrix> trajectory;
  McEstimate mu;
  double margin = 0.0;  ///< mu(argmin) - mu(0), paired
  double margin_se = 0.0;
};

struct ProbeReport {
  McEstimate mu_zero;
  std::vector<ProbeRestart> restarts;
  std::size_t best = 0;
  bool candidate_violation = false;
  std::string verdict;
};

ProbeReport probe_minimum(const ConvexBody& f, const ConvexBody& g, const SymMatrix& a, const SymMatrix& c,
                          const ProbeOptions& options, const RngStream& rng, Execution exec = {});

}  // namespace corrlab
