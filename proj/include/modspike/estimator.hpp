#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "modspike/linalg.hpp"
#include "modspike/rng.hpp"

namespace modspike::estimator {

using linalg::Matrix;

/// R = 2 sqrt(k) + z2(k, 0.1).
double default_radius(std::size_t k);

struct SpikeEstimate {
  std::vector<double> u_hat;        ///< unit norm, largest-magnitude coordinate positive
  std::vector<double> eigenvalues;  ///< of the |K|-normalized ball covariance, descending
  std::size_t n_selected = 0;
  std::size_t n_total = 0;
  double radius_used = 0.0;
  bool rank_deficient = false;  ///< n_selected < k; the estimate is still returned
};

/// Ball-truncated PCA. Reads only the folded samples and the radius: keeps the
/// rows with |y_i| <= R, forms their second moment normalized by the count, and
/// returns its principal eigenvector.
/// Throws EstimationError("no samples in ball") if nothing is selected.
SpikeEstimate estimate_spike(const Matrix& y, double radius);

/// +u_hat or -u_hat, whichever has nonnegative inner product with u_ref
/// (u_hat unchanged on an exact tie).
std::vector<double> align_sign(std::span<const double> u_hat, std::span<const double> u_ref);

/// |u - align_sign(u_hat, u)|
double estimation_error(std::span<const double> u, std::span<const double> u_hat);

enum class PballMethod { quadrature, monte_carlo };

struct PballResult {
  double value = 0.0;        ///< Pr(|X| <= R)
  double complement = 0.0;   ///< 1 - value, carried separately for the upper tail
  double lower_bound = 0.0;  ///< 0.9 erf((R - z2(0.1)) / sqrt(2 nu)); 0.9 erf(sqrt(2k/nu)) at the default radius
  double upper_bound = 0.0;  ///< erf(R / sqrt(2 (1 + nu)))
  double standard_error = 0.0;  ///< binomial SE (Monte Carlo only)
  PballMethod method = PballMethod::quadrature;
};

/// Pr((1+nu) g^2 + W <= R^2) with g ~ N(0,1), W ~ chi2_{k-1}, by adaptive
/// Gauss-Kronrod over g (substituted g = g_max sin t) against the chi-square
/// distribution function. Throws NumericError if the error estimate exceeds 1e-9.
PballResult p_ball(double nu, std::size_t k, double radius);

/// Monte-Carlo estimate of the same probability from `samples` draws of the model.
PballResult p_ball_monte_carlo(double nu, std::size_t k, double radius, std::size_t samples,
                               rngstat::RngStream& rng);

/// Inverts nu -> p_ball(nu) by bisection in log(1 + nu). Returns 0 when
/// p_observed equals p_ball(0). Throws DomainError when p_observed is outside
/// the attainable range (nu searched up to 1e12).
double estimate_nu(double p_observed, std::size_t k, double radius);

struct TruncatedEigenvalues {
  std::vector<double> mu;              ///< same order as the input lambdas
  std::vector<double> standard_error;
  std::size_t draws = 0;
  std::size_t accepted = 0;
  bool importance_sampled = false;
};

/// mu_i = E[lambda_i g_i^2 | sum_j lambda_j g_j^2 <= R^2] by conditional Monte Carlo.
/// Plain rejection when a pilot run accepts at least 1%; otherwise the largest
/// coordinate is drawn from its truncated conditional and the draw is weighted.
/// Throws DomainError for lambda_i <= 0 or n_mc < 1e4; EstimationError if fewer
/// than 100 draws are accepted.
TruncatedEigenvalues truncated_eigenvalues(std::span<const double> lambdas, double radius,
                                           std::size_t n_mc, rngstat::RngStream& rng);

/// Leading terms of the error bound with unit constants (trend overlay only).
/// nu <= k: (1/sqrt nu) max(k/n, sqrt(k/n)); nu > k: sqrt(nu)/n + sqrt(sqrt(nu/k)/n).
double theorem1_bound(std::size_t k, double n, double nu);

}  // namespace modspike::estimator
