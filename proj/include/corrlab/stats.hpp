#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace corrlab {

/// Monte Carlo result: sample mean with its standard error.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;

  double variance() const { return std_error * std_error * static_cast<double>(n_samples); }
};

/// Pool two estimates computed on disjoint sample sets.
McEstimate merge(const McEstimate& a, const McEstimate& b);

/// Welford running mean/variance; mergeable with Chan's pairwise update.
class MeanAccumulator {
 public:
  void add(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  void merge(const MeanAccumulator& other) noexcept;

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  /// Unbiased sample variance (0 when fewer than two samples).
  double variance() const noexcept {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
  }
  McEstimate estimate() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Running means and co-moments of a fixed-dimension vector observation.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(std::size_t dim = 0)
      : dim_(dim), mean_(dim, 0.0), comoment_(dim * dim, 0.0), delta_(dim, 0.0) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return n_; }

  void add(std::span<const double> x);
  void merge(const MomentAccumulator& other);

  double mean(std::size_t i) const { return mean_[i]; }
  /// Unbiased sample covariance of components i and j.
  double covariance(std::size_t i, std::size_t j) const {
    return n_ > 1 ? comoment_[i * dim_ + j] / static_cast<double>(n_ - 1) : 0.0;
  }
  McEstimate estimate(std::size_t i) const;

  /// Standard error of sum_i w_i * mean_i (linearized / delta method).
  double linear_std_error(std::span<const double> weights) const;

 private:
  std::size_t dim_;
  std::size_t n_ = 0;
  std::vector<double> mean_;
  std::vector<double> comoment_;
  std::vector<double> delta_;
};

/// Mean and standard error of a sample; throws for fewer than two values.
McEstimate mc_mean(std::span<const double> values);

/// Two-sample Cramer-von Mises statistic T (Anderson 1962 normalization).
double cramer_von_mises_2sample(std::vector<double> x, std::vector<double> y);

/// Asymptotic 1% critical value of the two-sample Cramer-von Mises statistic.
inline constexpr double kCramerVonMises1pct = 0.74346;

}  // namespace corrlab
