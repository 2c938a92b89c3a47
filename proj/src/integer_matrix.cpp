#include "modspike/integer_matrix.hpp"

#include <limits>
#include <sstream>

#include "modspike/error.hpp"

namespace modspike::linalg {

IntegerMatrix::IntegerMatrix(std::size_t dim, const std::vector<std::int64_t>& row_major)
    : dim_(dim), data_(dim * dim) {
  if (row_major.size() != dim * dim) throw DomainError("IntegerMatrix: entry count mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] = row_major[i];
}

IntegerMatrix IntegerMatrix::identity(std::size_t dim) {
  IntegerMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1;
  return m;
}

IntegerMatrix IntegerMatrix::transpose() const {
  IntegerMatrix t(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool IntegerMatrix::is_identity() const {
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j)
      if ((*this)(i, j) != (i == j ? 1 : 0)) return false;
  return true;
}

std::optional<std::vector<std::int64_t>> IntegerMatrix::to_int64() const {
  static const BigInt lo = std::numeric_limits<std::int64_t>::min();
  static const BigInt hi = std::numeric_limits<std::int64_t>::max();
  std::vector<std::int64_t> out(data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (data_[i] < lo || data_[i] > hi) return std::nullopt;
    out[i] = static_cast<std::int64_t>(data_[i]);
  }
  return out;
}

std::vector<double> IntegerMatrix::to_double() const {
  std::vector<double> out(data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) out[i] = data_[i].convert_to<double>();
  return out;
}

BigInt IntegerMatrix::max_abs() const {
  BigInt m = 0;
  for (const auto& v : data_) {
    const BigInt a = abs(v);
    if (a > m) m = a;
  }
  return m;
}

IntegerMatrix operator*(const IntegerMatrix& a, const IntegerMatrix& b) {
  if (a.dim() != b.dim()) throw DomainError("IntegerMatrix product: dimension mismatch");
  const std::size_t n = a.dim();
  IntegerMatrix c(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < n; ++l) {
      if (a(i, l) == 0) continue;
      for (std::size_t j = 0; j < n; ++j) c(i, j) += a(i, l) * b(l, j);
    }
  return c;
}

namespace {

void exact_divide(BigInt& value, const BigInt& divisor) {
  BigInt q, r;
  boost::multiprecision::divide_qr(value, divisor, q, r);
  if (r != 0) throw NumericError("fraction-free elimination: inexact division");
  value = std::move(q);
}

}  // namespace

BigInt determinant(const IntegerMatrix& a) {
  const std::size_t n = a.dim();
  if (n == 0) return 1;
  IntegerMatrix m = a;
  BigInt prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && m(p, k) == 0) ++p;
      if (p == n) return 0;
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        BigInt v = m(i, j) * m(k, k) - m(i, k) * m(k, j);
        exact_divide(v, prev);
        m(i, j) = std::move(v);
      }
      m(i, k) = 0;
    }
    prev = m(k, k);
  }
  return sign * m(n - 1, n - 1);
}

IntegerMatrix unimodular_inverse(const IntegerMatrix& a) {
  const std::size_t n = a.dim();
  const BigInt det = determinant(a);
  if (abs(det) != 1) {
    std::ostringstream msg;
    msg << "unimodular_inverse: |det| = " << abs(det) << ", matrix is not unimodular";
    throw DomainError(msg.str());
  }
  // Fraction-free Gauss-Jordan on [A | I]; ends with d*I on the left and d*A^{-1} on the right.
  const std::size_t w = 2 * n;
  std::vector<BigInt> m(n * w);
  auto at = [&](std::size_t i, std::size_t j) -> BigInt& { return m[i * w + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) at(i, j) = a(i, j);
    at(i, n + i) = 1;
  }
  BigInt prev = 1;
  for (std::size_t k = 0; k < n; ++k) {
    if (at(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && at(p, k) == 0) ++p;
      if (p == n) throw NumericError("unimodular_inverse: singular pivot column");
      for (std::size_t j = 0; j < w; ++j) std::swap(at(k, j), at(p, j));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      for (std::size_t j = 0; j < w; ++j) {
        if (j == k) continue;
        BigInt v = at(k, k) * at(i, j) - at(i, k) * at(k, j);
        exact_divide(v, prev);
        at(i, j) = std::move(v);
      }
      at(i, k) = 0;
    }
    prev = at(k, k);
  }
  IntegerMatrix inv(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      BigInt v = at(i, n + j);
      exact_divide(v, at(i, i));
      inv(i, j) = std::move(v);
    }
  return inv;
}

}  // namespace modspike::linalg
