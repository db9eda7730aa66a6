#include "corrlab/stable_model.hpp"

#include <cmath>
#include <numbers>

#include "corrlab/error.hpp"
#include "corrlab/linalg.hpp"

namespace corrlab {

StableModel::StableModel(double q, std::vector<SpectralAtom> atoms) : q_(q), atoms_(std::move(atoms)) {
  require(q_ > 0.0 && q_ <= 2.0, "StableModel: q must lie in (0, 2]");
  require(!atoms_.empty(), "StableModel: no atoms");
  dim_ = atoms_.front().vector.size();
  require(dim_ >= 1, "StableModel: zero-dimensional atoms");
  double total = 0.0;
  bool nondegenerate = false;
  for (const auto& atom : atoms_) {
    require(atom.vector.size() == dim_, "StableModel: atom dimension mismatch");
    require(std::isfinite(atom.weight) && atom.weight > 0.0, "StableModel: weights must be > 0");
    for (double x : atom.vector) {
      require(std::isfinite(x), "StableModel: non-finite atom entry");
      nondegenerate = nondegenerate || x != 0.0;
    }
    total += atom.weight;
  }
  require(std::abs(total - 1.0) <= 1e-12, "StableModel: weights must sum to 1");
  require(nondegenerate, "StableModel: all atoms are zero");
}

StableModel StableModel::from_step_functions(double q, const std::vector<StepFunction>& spectral) {
  require(!spectral.empty(), "from_step_functions: no spectral functions");
  const auto& weights = spectral.front().weights();
  std::vector<SpectralAtom> atoms(weights.size());
  for (std::size_t j = 0; j < weights.size(); ++j) {
    atoms[j].weight = weights[j];
    atoms[j].vector.resize(spectral.size());
  }
  for (std::size_t i = 0; i < spectral.size(); ++i) {
    require(spectral[i].weights() == weights, "from_step_functions: partitions differ");
    for (std::size_t j = 0; j < weights.size(); ++j) atoms[j].vector[i] = spectral[i].values()[j];
  }
  return {q, std::move(atoms)};
}

double StableModel::exponent(std::span<const double> theta) const {
  require(theta.size() == dim_, "char_value: dimension mismatch");
  double s = 0.0;
  for (const auto& atom : atoms_) s += atom.weight * std::pow(std::abs(dot(theta, atom.vector)), q_);
  return s;
}

Functionals::Functionals(std::vector<std::vector<double>> vectors) : vectors_(std::move(vectors)) {
  require(!vectors_.empty(), "Functionals: k must be >= 1");
  const std::size_t n = vectors_.front().size();
  require(n >= 1, "Functionals: zero-dimensional vectors");
  for (const auto& v : vectors_) {
    require(v.size() == n, "Functionals: dimension mismatch");
    for (double x : v) require(std::isfinite(x), "Functionals: non-finite entry");
  }
}

double char_value(const StableModel& model, std::span<const double> theta) {
  return std::exp(-model.exponent(theta));
}

double sample_standard_stable(double q, RngStream& rng) {
  require(q > 0.0 && q <= 2.0, "sample_standard_stable: q must lie in (0, 2]");
  if (q == 2.0) return std::numbers::sqrt2 * rng.normal();
  // Both branches consume one (angle, exponential) pair so the stream layout
  // does not depend on q.
  const double angle = std::numbers::pi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  if (std::abs(q - 1.0) <= 1e-9) return std::tan(angle);
  return std::sin(q * angle) / std::pow(std::cos(angle), 1.0 / q) *
         std::pow(std::cos((1.0 - q) * angle) / w, (1.0 - q) / q);
}

void sample_vector(const StableModel& model, RngStream& rng, std::span<double> out) {
  require(out.size() == model.dim(), "sample_vector: output dimension mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  const double inv_q = 1.0 / model.q();
  for (const auto& atom : model.atoms()) {
    const double z = std::pow(atom.weight, inv_q) * sample_standard_stable(model.q(), rng);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += z * atom.vector[i];
  }
}

std::vector<double> sample_vector(const StableModel& model, RngStream& rng) {
  std::vector<double> y(model.dim());
  sample_vector(model, rng, y);
  return y;
}

StableModel project(const StableModel& model, const Functionals& xi) {
  require(xi.dim() == model.dim(), "project: functional dimension differs from model dimension");
  std::vector<SpectralAtom> atoms;
  atoms.reserve(model.atoms().size());
  bool nondegenerate = false;
  for (const auto& atom : model.atoms()) {
    SpectralAtom projected{atom.weight, std::vector<double>(xi.count())};
    for (std::size_t i = 0; i < xi.count(); ++i) {
      projected.vector[i] = dot(xi[i], atom.vector);
      nondegenerate = nondegenerate || projected.vector[i] != 0.0;
    }
    atoms.push_back(std::move(projected));
  }
  require(nondegenerate, "project: functionals annihilate every atom");
  return {model.q(), std::move(atoms)};
}

std::vector<double> pull_back(const Functionals& xi, std::span<const double> u) {
  require(u.size() == xi.count(), "pull_back: coefficient count mismatch");
  std::vector<double> alpha(xi.dim(), 0.0);
  for (std::size_t i = 0; i < xi.count(); ++i)
    for (std::size_t d = 0; d < alpha.size(); ++d) alpha[d] += u[i] * xi[i][d];
  return alpha;
}

std::vector<McEstimate> empirical_char_function(const StableModel& model,
                                                const std::vector<std::vector<double>>& thetas,
                                                std::size_t n_samples, const RngStream& rng,
                                                Execution exec) {
  for (const auto& t : thetas) require(t.size() == model.dim(), "empirical_char_function: dimension mismatch");
  const std::size_t n_theta = thetas.size();
  auto acc = run_blocks(
      n_samples, rng, [n_theta] { return MomentAccumulator(n_theta); },
      [&](MomentAccumulator& a, RngStream& r, std::size_t, std::size_t count) {
        std::vector<double> y(model.dim());
        std::vector<double> obs(n_theta);
        for (std::size_t s = 0; s < count; ++s) {
          sample_vector(model, r, y);
          for (std::size_t t = 0; t < n_theta; ++t) obs[t] = std::cos(dot(thetas[t], y));
          a.add(obs);
        }
      },
      exec);
  std::vector<McEstimate> out(n_theta);
  for (std::size_t t = 0; t < n_theta; ++t) out[t] = acc.estimate(t);
  return out;
}

StableModel random_stable_model(RngStream& rng, double q, std::size_t n, std::size_t atoms) {
  const auto weights = random_partition(rng, atoms);
  std::vector<SpectralAtom> list(atoms);
  for (std::size_t j = 0; j < atoms; ++j) {
    list[j].weight = weights[j];
    list[j].vector.resize(n);
    for (double& x : list[j].vector) x = rng.normal();
  }
  return {q, std::move(list)};
}

Functionals random_functionals(RngStream& rng, std::size_t k, std::size_t n) {
  std::vector<std::vector<double>> v(k, std::vector<double>(n));
  for (auto& row : v)
    for (double& x : row) x = rng.normal();
  return Functionals(std::move(v));
}

}  // namespace corrlab
