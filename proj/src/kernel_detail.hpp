#pragma once

// Per-row and per-block bodies shared by the serial and OpenMP kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "modspike/kernels.hpp"
#include "modspike/model.hpp"
#include "modspike/rng.hpp"

namespace modspike::kernels::detail {

inline void sample_row(std::span<const double> u, double sqrt_nu, std::uint64_t master_seed,
                       std::uint64_t family, std::size_t index, std::span<double> out) {
  rngstat::RngStream rng(master_seed, rngstat::derive_stream_id(family, index));
  const double spike = sqrt_nu * rng.gaussian();
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = spike * u[j] + rng.gaussian();
}

inline void fold_row(std::span<const double> x, double delta, std::span<double> y) {
  for (std::size_t j = 0; j < x.size(); ++j) y[j] = model::modulo_reduce(x[j], delta);
}

inline std::size_t block_count(std::size_t rows) { return (rows + kBlockRows - 1) / kBlockRows; }

/// Upper-triangle partial sum (packed, row-major over i <= j) for one block of rows.
inline std::size_t ball_block(const Matrix& y, double r2, std::size_t block,
                              std::vector<double>& packed) {
  const std::size_t k = y.cols();
  std::fill(packed.begin(), packed.end(), 0.0);
  std::size_t selected = 0;
  const std::size_t end = std::min(y.rows(), (block + 1) * kBlockRows);
  for (std::size_t i = block * kBlockRows; i < end; ++i) {
    const auto row = y.row(i);
    double n2 = 0.0;
    for (double v : row) n2 += v * v;
    if (n2 > r2) continue;
    ++selected;
    std::size_t p = 0;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a; b < k; ++b) packed[p++] += row[a] * row[b];
  }
  return selected;
}

inline BallMoment combine_blocks(std::size_t k, const std::vector<std::vector<double>>& partial,
                                 const std::vector<std::size_t>& counts) {
  BallMoment out{linalg::SymMatrix(k), 0};
  std::vector<double> total(k * (k + 1) / 2, 0.0);
  for (std::size_t b = 0; b < partial.size(); ++b) {
    out.selected += counts[b];
    for (std::size_t p = 0; p < total.size(); ++p) total[p] += partial[b][p];
  }
  std::size_t p = 0;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a; b < k; ++b) out.sum.set(a, b, total[p++]);
  return out;
}

inline bool rows_differ(std::span<const double> a, std::span<const double> b, double tol) {
  for (std::size_t j = 0; j < a.size(); ++j)
    if (!(std::abs(a[j] - b[j]) <= tol)) return true;
  return false;
}

}  // namespace modspike::kernels::detail
