#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace corrlab {

/// Dense row-major matrix; used for general (non-symmetric) blocks such as B.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Symmetric matrix with one stored copy per (i, j) pair (packed lower).
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * (n + 1) / 2, fill) {}

  static SymMatrix identity(std::size_t n);
  static SymMatrix diagonal(std::span<const double> diag);
  /// Build from a dense square matrix, symmetrizing as (M + M^T) / 2.
  static SymMatrix from_dense(const Matrix& m);
  static SymMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t dim() const noexcept { return n_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[index(i, j)]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[index(i, j)]; }

  Matrix to_dense() const;
  double frobenius_norm() const;
  double max_abs_diagonal() const;
  bool all_finite() const;

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  static std::size_t index(std::size_t i, std::size_t j) noexcept {
    return i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i;
  }

  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct SymEigen {
  std::vector<double> values;  ///< ascending
  Matrix vectors;              ///< column k is the eigenvector of values[k]
};

/// Cyclic Jacobi eigendecomposition. Throws InvalidArgument on non-finite input.
SymEigen sym_eigen(const SymMatrix& m);

/// Eigenvalues in ascending order.
std::vector<double> sym_eigenvalues(const SymMatrix& m);

/// Lower-triangular L with L L^T = M; throws NotSpdError when a pivot is not
/// above 1e-12 times the largest diagonal entry.
Matrix cholesky(const SymMatrix& m);

/// Pivot threshold used by cholesky, relative to max |M_ii|.
inline constexpr double kSpdRelativeTolerance = 1e-12;

/// y = L x for a lower-triangular L (entries above the diagonal ignored).
void lower_multiply(const Matrix& lower, std::span<const double> x, std::span<double> y);

std::vector<double> multiply(const Matrix& m, std::span<const double> x);
std::vector<double> multiply(const SymMatrix& m, std::span<const double> x);
Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace corrlab
