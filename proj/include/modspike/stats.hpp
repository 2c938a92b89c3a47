#pragma once

#include <cstddef>

namespace modspike::rngstat {

/// Gaussian tail thresholds. For Z ~ N(0, I_k): Pr(|Z| >= z2) <= delta,
/// Pr(|Z|_inf >= z_inf) <= delta; for scalar xi ~ N(0,1): Pr(|xi| >= h) <= delta.
struct TailThresholds {
  double z2;
  double z_inf;
  double h;
};

/// Throws DomainError unless k >= 1 and 0 < delta <= 1.
TailThresholds tail_thresholds(std::size_t k, double delta);

/// Error function, absolute error <= 1e-12. Maclaurin series for |x| < 2.5,
/// Lentz continued fraction for erfc beyond.
double erf(double x);
/// Complementary error function with relative accuracy in the far tail.
double erfc(double x);

/// Standard normal upper tail Pr(xi > x).
double normal_sf(double x);

/// Chi-square distribution function with `dof` degrees of freedom (dof = 0 is a point mass at 0).
double chi2_cdf(double x, double dof);
/// Chi-square survival function 1 - chi2_cdf, accurate in the upper tail.
double chi2_sf(double x, double dof);

}  // namespace modspike::rngstat
