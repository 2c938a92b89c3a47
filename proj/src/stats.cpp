#include "modspike/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

#include "modspike/error.hpp"

namespace modspike::rngstat {

namespace {

constexpr double kSeriesCutoff = 2.5;

// erf(x) = 2/sqrt(pi) * exp(-x^2) * sum_n 2^n x^(2n+1) / (1*3*...*(2n+1)); all terms positive.
double erf_series(double x) {
  const double x2 = x * x;
  double term = x;
  double sum = x;
  for (int n = 0; n < 500; ++n) {
    term *= 2.0 * x2 / (2.0 * n + 3.0);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-x2) * sum;
}

// erfc(x) for x >= kSeriesCutoff: exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))).
double erfc_continued_fraction(double x) {
  constexpr double tiny = 1e-300;
  double f = x;
  double c = f;
  double d = 0.0;
  for (int j = 1; j < 5000; ++j) {
    const double a = 0.5 * j;
    d = x + a * d;
    if (std::abs(d) < tiny) d = tiny;
    c = x + a / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x * x) / (std::sqrt(std::numbers::pi) * f);
}

}  // namespace

double erf(double x) {
  if (std::isnan(x)) return x;
  const double ax = std::abs(x);
  double r;
  if (ax < kSeriesCutoff) {
    r = erf_series(ax);
  } else if (ax > 6.5) {
    r = 1.0;  // erfc(6.5) < 1e-19
  } else {
    r = 1.0 - erfc_continued_fraction(ax);
  }
  return x < 0 ? -r : r;
}

double erfc(double x) {
  if (std::isnan(x)) return x;
  if (x >= kSeriesCutoff) return x > 27.0 ? 0.0 : erfc_continued_fraction(x);
  if (x <= -kSeriesCutoff) return 2.0 - erfc(-x);
  return 1.0 - erf(x);
}

double normal_sf(double x) { return 0.5 * erfc(x / std::numbers::sqrt2); }

double chi2_cdf(double x, double dof) {
  if (x <= 0.0) return dof == 0.0 && x == 0.0 ? 1.0 : 0.0;
  if (dof == 0.0) return 1.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_sf(double x, double dof) {
  if (x <= 0.0) return dof == 0.0 && x == 0.0 ? 0.0 : 1.0;
  if (dof == 0.0) return 0.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

TailThresholds tail_thresholds(std::size_t k, double delta) {
  if (k < 1) throw DomainError("tail_thresholds: k must be >= 1");
  if (!(delta > 0.0) || delta > 1.0) throw DomainError("tail_thresholds: delta must lie in (0, 1]");
  const double kd = static_cast<double>(k);
  const double log_inv = std::log(1.0 / delta);
  TailThresholds t;
  t.z2 = std::sqrt(kd + 2.0 * std::sqrt(kd * log_inv) + 2.0 * log_inv);
  t.h = std::sqrt(2.0 * std::log(2.0 / delta));
  t.z_inf = std::sqrt(2.0 * std::log(kd)) + t.h;
  return t;
}

}  // namespace modspike::rngstat
