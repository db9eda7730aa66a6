#include "corrlab/stats.hpp"

#include <algorithm>
#include <numeric>

#include "corrlab/error.hpp"

namespace corrlab {

McEstimate merge(const McEstimate& a, const McEstimate& b) {
  if (a.n_samples == 0) return b;
  if (b.n_samples == 0) return a;
  const double na = static_cast<double>(a.n_samples);
  const double nb = static_cast<double>(b.n_samples);
  const double n = na + nb;
  const double mean = (na * a.mean + nb * b.mean) / n;
  // Reconstruct M2 = var * (n - 1) for each part.
  const double m2a = a.variance() * (na - 1.0);
  const double m2b = b.variance() * (nb - 1.0);
  const double delta = b.mean - a.mean;
  const double m2 = m2a + m2b + delta * delta * na * nb / n;
  const double var = m2 / (n - 1.0);
  return {mean, std::sqrt(var / n), a.n_samples + b.n_samples};
}

void MeanAccumulator::merge(const MeanAccumulator& other) noexcept {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  n_ += other.n_;
}

McEstimate MeanAccumulator::estimate() const {
  return {mean_, n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0, n_};
}

void MomentAccumulator::add(std::span<const double> x) {
  ++n_;
  const double inv_n = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < dim_; ++i) {
    delta_[i] = x[i] - mean_[i];
    mean_[i] += delta_[i] * inv_n;
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    const double after = x[i] - mean_[i];
    for (std::size_t j = 0; j < dim_; ++j) comoment_[j * dim_ + i] += delta_[j] * after;
  }
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  require(other.dim_ == dim_, "MomentAccumulator::merge: dimension mismatch");
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  for (std::size_t i = 0; i < dim_; ++i) delta_[i] = other.mean_[i] - mean_[i];
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) {
      comoment_[i * dim_ + j] += other.comoment_[i * dim_ + j] + delta_[i] * delta_[j] * na * nb / n;
    }
  }
  for (std::size_t i = 0; i < dim_; ++i) mean_[i] += delta_[i] * nb / n;
  n_ += other.n_;
}

McEstimate MomentAccumulator::estimate(std::size_t i) const {
  return {mean_[i], n_ > 0 ? std::sqrt(covariance(i, i) / static_cast<double>(n_)) : 0.0, n_};
}

double MomentAccumulator::linear_std_error(std::span<const double> weights) const {
  require(weights.size() == dim_, "linear_std_error: weight count mismatch");
  if (n_ < 2) return 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) var += weights[i] * weights[j] * covariance(i, j);
  return std::sqrt(std::max(var, 0.0) / static_cast<double>(n_));
}

McEstimate mc_mean(std::span<const double> values) {
  require(values.size() >= 2, "mc_mean: need at least 2 samples");
  MeanAccumulator acc;
  for (double v : values) acc.add(v);
  return acc.estimate();
}

double cramer_von_mises_2sample(std::vector<double> x, std::vector<double> y) {
  require(!x.empty() && !y.empty(), "cramer_von_mises_2sample: empty sample");
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());

  // Ranks in the pooled sample; ties are rare for continuous data and are
  // broken in favour of x.
  double sum_x = 0.0;
  double sum_y = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t rank = 0;
  while (i < n || j < m) {
    ++rank;
    if (j == m || (i < n && x[i] <= y[j])) {
      const double d = static_cast<double>(rank) - static_cast<double>(i + 1);
      sum_x += d * d;
      ++i;
    } else {
      const double d = static_cast<double>(rank) - static_cast<double>(j + 1);
      sum_y += d * d;
      ++j;
    }
  }
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  const double u = dn * sum_x + dm * sum_y;
  return u / (dn * dm * (dn + dm)) - (4.0 * dm * dn - 1.0) / (6.0 * (dm + dn));
}

}  // namespace corrlab
