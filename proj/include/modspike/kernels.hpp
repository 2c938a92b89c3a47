#pragma once

// Data-parallel batch kernels. Every kernel exists twice: `serial` is the
// reference, `parallel` is the OpenMP version. Reductions walk fixed-size row
// blocks in a fixed order in both, so the two agree bit-for-bit regardless of
// thread count.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "modspike/linalg.hpp"

namespace modspike::kernels {

using linalg::Matrix;

inline constexpr std::size_t kBlockRows = 256;

/// Unnormalized second moment sum_{|y_i| <= R} y_i y_i^T and the selection count.
struct BallMoment {
  linalg::SymMatrix sum;
  std::size_t selected = 0;
};

namespace serial {
void sample_spiked(std::span<const double> u, double nu, std::uint64_t master_seed,
                   std::uint64_t family, Matrix& x);
void fold(const Matrix& x, double delta, Matrix& y);
BallMoment ball_second_moment(const Matrix& y, double radius);
std::size_t count_row_mismatches(const Matrix& a, const Matrix& b, double tolerance);

template <class Decoder>
void decode_rows(const Matrix& y, const Decoder& decoder, Matrix& xhat) {
  xhat = Matrix(y.rows(), y.cols());
  for (std::size_t i = 0; i < y.rows(); ++i) decoder.decode_into(y.row(i), xhat.row(i));
}
}  // namespace serial

namespace parallel {
void sample_spiked(std::span<const double> u, double nu, std::uint64_t master_seed,
                   std::uint64_t family, Matrix& x);
void fold(const Matrix& x, double delta, Matrix& y);
BallMoment ball_second_moment(const Matrix& y, double radius);
std::size_t count_row_mismatches(const Matrix& a, const Matrix& b, double tolerance);

template <class Decoder>
void decode_rows(const Matrix& y, const Decoder& decoder, Matrix& xhat) {
  xhat = Matrix(y.rows(), y.cols());
  const auto n = static_cast<std::ptrdiff_t>(y.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    decoder.decode_into(y.row(r), xhat.row(r));
  }
}
}  // namespace parallel

}  // namespace modspike::kernels
