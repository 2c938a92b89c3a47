#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace modspike::linalg {

using BigInt = boost::multiprecision::cpp_int;

/// Square matrix of arbitrary-precision integers.
class IntegerMatrix {
 public:
  IntegerMatrix() = default;
  explicit IntegerMatrix(std::size_t dim) : dim_(dim), data_(dim * dim) {}
  IntegerMatrix(std::size_t dim, const std::vector<std::int64_t>& row_major);

  static IntegerMatrix identity(std::size_t dim);

  std::size_t dim() const { return dim_; }
  BigInt& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
  const BigInt& operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }

  IntegerMatrix transpose() const;
  bool is_identity() const;

  /// Entries as int64 if every entry fits, otherwise nullopt.
  std::optional<std::vector<std::int64_t>> to_int64() const;
  std::vector<double> to_double() const;
  /// max |entry|
  BigInt max_abs() const;

  friend bool operator==(const IntegerMatrix&, const IntegerMatrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<BigInt> data_;
};

IntegerMatrix operator*(const IntegerMatrix& a, const IntegerMatrix& b);

/// Exact determinant by fraction-free (Bareiss) elimination.
BigInt determinant(const IntegerMatrix& a);

/// Exact inverse of a unimodular matrix via fraction-free Gauss-Jordan.
/// Throws DomainError if |det A| != 1.
IntegerMatrix unimodular_inverse(const IntegerMatrix& a);

}  // namespace modspike::linalg
