#include <cmath>

#include "kernel_detail.hpp"
#include "modspike/error.hpp"

namespace modspike::kernels::parallel {

void sample_spiked(std::span<const double> u, double nu, std::uint64_t master_seed,
                   std::uint64_t family, Matrix& x) {
  const double sqrt_nu = std::sqrt(nu);
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    detail::sample_row(u, sqrt_nu, master_seed, family, r, x.row(r));
  }
}

void fold(const Matrix& x, double delta, Matrix& y) {
  y = Matrix(x.rows(), x.cols());
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    detail::fold_row(x.row(r), delta, y.row(r));
  }
}

BallMoment ball_second_moment(const Matrix& y, double radius) {
  const std::size_t k = y.cols();
  const std::size_t blocks = detail::block_count(y.rows());
  std::vector<std::vector<double>> partial(blocks, std::vector<double>(k * (k + 1) / 2));
  std::vector<std::size_t> counts(blocks);
  const double r2 = radius * radius;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const auto bb = static_cast<std::size_t>(b);
    counts[bb] = detail::ball_block(y, r2, bb, partial[bb]);
  }
  return detail::combine_blocks(k, partial, counts);
}

std::size_t count_row_mismatches(const Matrix& a, const Matrix& b, double tolerance) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DomainError("count_row_mismatches: shape mismatch");
  std::size_t errors = 0;
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static) reduction(+ : errors)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    if (detail::rows_differ(a.row(r), b.row(r), tolerance)) ++errors;
  }
  return errors;
}

}  // namespace modspike::kernels::parallel
