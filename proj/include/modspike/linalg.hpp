#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace modspike::linalg {

/// Dense row-major real matrix. Sample batches are stored one sample per row.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  Matrix transpose() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
std::vector<double> operator*(const Matrix& a, std::span<const double> x);

/// Square matrix with exactly symmetric storage: every write goes to both (i,j) and (j,i).
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim) : m_(dim, dim) {}
  /// Throws DomainError unless `m` is square and exactly symmetric.
  explicit SymMatrix(Matrix m);

  static SymMatrix identity(std::size_t dim);

  std::size_t dim() const { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  void set(std::size_t i, std::size_t j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }
  void add(std::size_t i, std::size_t j, double v) {
    m_(i, j) += v;
    if (i != j) m_(j, i) += v;
  }
  const Matrix& matrix() const { return m_; }

  /// x^T A x
  double quadratic_form(std::span<const double> x) const;

 private:
  Matrix m_;
};

/// Spiked covariance nu * u u^T + I.
SymMatrix spiked_covariance(std::span<const double> u, double nu);

struct EigenDecomposition {
  std::vector<double> eigenvalues;  ///< descending
  Matrix eigenvectors;              ///< column i pairs with eigenvalues[i]
  std::vector<double> vector(std::size_t i) const;
};

/// Full eigendecomposition by cyclic Jacobi rotations. Each eigenvector is
/// signed so that its largest-magnitude coordinate is positive.
/// Throws NumericError if the sweep cap is hit.
EigenDecomposition sym_eig(const SymMatrix& a);

/// Lower-triangular L with L L^T = A and positive diagonal. Throws DomainError on a pivot <= 0.
Matrix cholesky(const SymMatrix& a);

/// A^{-1} for SPD A, via Cholesky.
SymMatrix spd_inverse(const SymMatrix& a);

/// Symmetric A^{p} for SPD A (used for Sigma^{-1/2}).
SymMatrix spd_power(const SymMatrix& a, double p);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double frobenius(const Matrix& a);

}  // namespace modspike::linalg
