#include <cmath>

#include "kernel_detail.hpp"
#include "modspike/error.hpp"

namespace modspike::kernels::serial {

void sample_spiked(std::span<const double> u, double nu, std::uint64_t master_seed,
                   std::uint64_t family, Matrix& x) {
  const double sqrt_nu = std::sqrt(nu);
  for (std::size_t i = 0; i < x.rows(); ++i)
    detail::sample_row(u, sqrt_nu, master_seed, family, i, x.row(i));
}

void fold(const Matrix& x, double delta, Matrix& y) {
  y = Matrix(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) detail::fold_row(x.row(i), delta, y.row(i));
}

BallMoment ball_second_moment(const Matrix& y, double radius) {
  const std::size_t k = y.cols();
  const std::size_t blocks = detail::block_count(y.rows());
  std::vector<std::vector<double>> partial(blocks, std::vector<double>(k * (k + 1) / 2));
  std::vector<std::size_t> counts(blocks);
  for (std::size_t b = 0; b < blocks; ++b)
    counts[b] = detail::ball_block(y, radius * radius, b, partial[b]);
  return detail::combine_blocks(k, partial, counts);
}

std::size_t count_row_mismatches(const Matrix& a, const Matrix& b, double tolerance) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DomainError("count_row_mismatches: shape mismatch");
  std::size_t errors = 0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    if (detail::rows_differ(a.row(i), b.row(i), tolerance)) ++errors;
  return errors;
}

}  // namespace modspike::kernels::serial
