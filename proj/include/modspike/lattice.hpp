#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "modspike/integer_matrix.hpp"
#include "modspike/linalg.hpp"

namespace modspike::lattice {

using linalg::IntegerMatrix;
using linalg::Matrix;
using linalg::SymMatrix;

/// Square real basis; the lattice is B Z^k with the columns of B as generators.
class LatticeBasis {
 public:
  /// Throws DomainError if some Gram-Schmidt length falls below 1e-20 of its
  /// column's squared length (numerically rank deficient).
  explicit LatticeBasis(Matrix columns);

  std::size_t dim() const { return b_.rows(); }
  const Matrix& matrix() const { return b_; }
  std::vector<double> column(std::size_t j) const;

 private:
  Matrix b_;
};

inline constexpr double kDefaultLovasz = 0.75;

struct LllResult {
  LatticeBasis reduced;
  IntegerMatrix u;  ///< reduced = B U
};

struct LllCheck {
  bool size_reduced = false;
  bool lovasz = false;
  bool unimodular = false;
  double max_mu = 0.0;       ///< max |mu_ij| over j < i
  double worst_lovasz = 0.0;  ///< min over i of |b*_i|^2 / ((delta - mu^2) |b*_{i-1}|^2)
  bool ok() const { return size_reduced && lovasz && unimodular; }
};

/// Recomputes B U from the exact U and checks size reduction (|mu| <= 1/2 + 1e-9)
/// and the Lovasz condition (1e-9 relative slack), plus |det U| = 1.
LllCheck check_lll(const LatticeBasis& b, const IntegerMatrix& u, double delta_lovasz);

/// LLL with floating Gram-Schmidt and exact unimodular tracking. The result is
/// re-checked with check_lll; one restart from B U is allowed before failing.
/// Throws DomainError for delta_lovasz outside (1/4, 1], NumericError if the
/// iteration cap is hit or the check fails twice.
LllResult lll_reduce(const LatticeBasis& b, double delta_lovasz = kDefaultLovasz);

/// Integer-forcing unwrapper x = A^{-1} ([A y] mod delta).
class IFDecoder {
 public:
  /// Throws DomainError if A is not unimodular or delta <= 0.
  IFDecoder(IntegerMatrix a, double delta, double max_variance);

  const IntegerMatrix& a() const { return a_; }
  const IntegerMatrix& a_inv() const { return a_inv_; }
  double delta() const { return delta_; }
  double max_variance() const { return max_variance_; }
  std::size_t dim() const { return a_.dim(); }
  IFDecoder with_delta(double delta) const;

  /// Thread safe. Computed as y - delta A^{-1} m with m the integer wrap count of
  /// A y, so A^{-1} is only ever applied to integers.
  void decode_into(std::span<const double> y, std::span<double> out) const;

 private:
  IntegerMatrix a_;
  IntegerMatrix a_inv_;
  double delta_;
  double max_variance_;
  std::vector<double> a_d_;
  std::vector<double> a_inv_d_;
  std::vector<std::int64_t> a_inv_i_;
  bool small_inverse_ = false;
  double inv_bound_ = 0.0;  ///< max |A^{-1}| * k
};

/// max_l a_l^T Sigma a_l over the rows of A.
double if_max_variance(const IntegerMatrix& a, const SymMatrix& sigma);

/// A = U^T where U reduces the basis L^T with Sigma = L L^T, so rows of A are
/// short in the Sigma norm. Restricted to |det A| = 1.
IFDecoder integer_forcing_matrix(const SymMatrix& sigma, double delta);

struct ExhaustiveIF {
  IntegerMatrix a;
  double max_variance = 0.0;
};

/// Smallest achievable max row variance over unimodular A whose entries lie in
/// [-entry_bound, entry_bound]. k <= 3 only (DomainError otherwise).
ExhaustiveIF exhaustive_integer_forcing(const SymMatrix& sigma, int entry_bound = 3);

/// ceil((R + 6 sqrt(lambda_1)) / delta) + 1 with R the default ball radius.
int default_coeff_bound(const SymMatrix& sigma, double delta);

/// argmin over t in [-B, B]^k of (y + delta t)^T Sigma^{-1} (y + delta t); ties go
/// to the lexicographically smallest t.
class MapDecoder {
 public:
  /// Throws DomainError for k > 4, delta <= 0 or coeff_bound < 1.
  MapDecoder(const SymMatrix& sigma, double delta, int coeff_bound);
  double delta() const { return delta_; }
  int coeff_bound() const { return bound_; }
  void decode_into(std::span<const double> y, std::span<double> out) const;

 private:
  std::size_t k_;
  std::vector<double> precision_;
  double delta_;
  int bound_;
};

std::vector<double> map_decode_bruteforce(std::span<const double> y, const SymMatrix& sigma,
                                          double delta, int coeff_bound);

struct TrivialDecoder {
  void decode_into(std::span<const double> y, std::span<double> out) const;
};

Matrix trivial_decode(const Matrix& y);
Matrix if_decode(const Matrix& y, const IFDecoder& decoder);

/// True iff z is at least as close to 0 as to every G t with 0 < |t|_inf <= B.
bool in_voronoi_zero(std::span<const double> z, const Matrix& generator, int coeff_bound);

struct DecodeReport {
  std::string decoder_name;
  std::size_t n = 0;
  std::size_t n_errors = 0;
  double p_e_hat = 0.0;
};

/// A sample is an error iff some coordinate is off by more than 1e-6 delta.
DecodeReport evaluate_unwrapping(const Matrix& x, const Matrix& xhat, double delta,
                                 std::string decoder_name);

}  // namespace modspike::lattice
