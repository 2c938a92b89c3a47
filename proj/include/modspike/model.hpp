#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "modspike/linalg.hpp"
#include "modspike/rng.hpp"

namespace modspike::model {

using linalg::Matrix;

/// Rank-1 spiked Gaussian: X = sqrt(nu) * xi * u + Z, covariance nu u u^T + I.
class SpikedModel {
 public:
  /// Throws DomainError if nu < 0, u is empty, or |u| differs from 1 by more than 1e-12.
  SpikedModel(double nu, std::vector<double> u);
  /// Draws u uniformly on the sphere.
  static SpikedModel random_direction(std::size_t k, double nu, rngstat::RngStream& rng);

  std::size_t k() const { return u_.size(); }
  double nu() const { return nu_; }
  const std::vector<double>& u() const { return u_; }
  linalg::SymMatrix covariance() const { return linalg::spiked_covariance(u_, nu_); }

 private:
  double nu_;
  std::vector<double> u_;
};

/// Coordinate-wise folding into [-delta/2, delta/2).
class ModuloChannel {
 public:
  explicit ModuloChannel(double delta);
  double delta() const { return delta_; }

 private:
  double delta_;
};

/// The representative of x modulo delta in [-delta/2, delta/2). Values already in
/// range are returned bit-for-bit; delta/2 maps to -delta/2.
double modulo_reduce(double x, double delta);

/// n x k matrix of i.i.d. rows from the model. Consumes one draw from `rng`;
/// row i then uses its own derived stream, so the result does not depend on
/// thread count.
Matrix sample_spiked(const SpikedModel& model, std::size_t n, rngstat::RngStream& rng);

Matrix apply_channel(const Matrix& x, const ModuloChannel& channel);

struct SampleFlags {
  bool in_ball = false;    ///< |y| <= R
  bool x_in_ball = false;  ///< |x| <= R
  bool good = false;       ///< in_ball and x == y
  bool bad = false;        ///< in_ball and x != y
};

std::vector<SampleFlags> classify_batch(const Matrix& x, const Matrix& y, double radius);

struct SampleBatch {
  Matrix x;
  Matrix y;
  std::vector<SampleFlags> flags;

  std::size_t n() const { return x.rows(); }
  std::size_t k() const { return x.cols(); }
  std::size_t count_in_ball() const;
  std::size_t count_x_in_ball() const;
  std::size_t count_good() const;
  std::size_t count_bad() const;
};

SampleBatch generate_batch(const SpikedModel& model, const ModuloChannel& channel, std::size_t n,
                           double radius, rngstat::RngStream& rng);

// CSV: X and Y files share the header `sample_id,coord_0,...,coord_{k-1}`;
// flags file is `sample_id,in_ball,x_in_ball,good,bad` with 0/1 entries.
void write_samples_csv(std::ostream& os, const Matrix& m);
Matrix read_samples_csv(std::istream& is);
void write_flags_csv(std::ostream& os, const std::vector<SampleFlags>& flags);
std::vector<SampleFlags> read_flags_csv(std::istream& is);

}  // namespace modspike::model
