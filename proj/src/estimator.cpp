#include "modspike/estimator.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "modspike/ball_sampler.hpp"
#include "modspike/error.hpp"
#include "modspike/kernels.hpp"
#include "modspike/stats.hpp"

namespace modspike::estimator {

double default_radius(std::size_t k) {
  return 2.0 * std::sqrt(static_cast<double>(k)) + rngstat::tail_thresholds(k, 0.1).z2;
}

SpikeEstimate estimate_spike(const Matrix& y, double radius) {
  if (y.rows() == 0 || y.cols() == 0) throw DomainError("estimate_spike: empty sample matrix");
  if (!(radius > 0.0)) throw DomainError("estimate_spike: radius must be > 0");
  const auto moment = kernels::parallel::ball_second_moment(y, radius);
  if (moment.selected == 0) throw EstimationError("no samples in ball");

  const std::size_t k = y.cols();
  linalg::SymMatrix sigma(k);
  const double inv = 1.0 / static_cast<double>(moment.selected);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j <= i; ++j) sigma.set(i, j, moment.sum(i, j) * inv);
  const auto eig = linalg::sym_eig(sigma);

  SpikeEstimate est;
  est.u_hat = eig.vector(0);
  est.eigenvalues = eig.eigenvalues;
  est.n_selected = moment.selected;
  est.n_total = y.rows();
  est.radius_used = radius;
  est.rank_deficient = moment.selected < k;
  return est;
}

std::vector<double> align_sign(std::span<const double> u_hat, std::span<const double> u_ref) {
  std::vector<double> out(u_hat.begin(), u_hat.end());
  if (linalg::dot(u_hat, u_ref) < 0.0)
    for (double& v : out) v = -v;
  return out;
}

double estimation_error(std::span<const double> u, std::span<const double> u_hat) {
  const auto aligned = align_sign(u_hat, u);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - aligned[i]) * (u[i] - aligned[i]);
  return std::sqrt(s);
}

namespace {

void fill_bounds(PballResult& r, double nu, std::size_t k, double radius) {
  const double z2 = rngstat::tail_thresholds(k, 0.1).z2;
  const double slack = radius - z2;
  if (slack <= 0.0) {
    r.lower_bound = 0.0;
  } else if (nu == 0.0) {
    r.lower_bound = 0.9;
  } else {
    r.lower_bound = 0.9 * rngstat::erf(slack / std::sqrt(2.0 * nu));
  }
  r.upper_bound = rngstat::erf(radius / std::sqrt(2.0 * (1.0 + nu)));
}

template <class F>
double integrate_half_period(F f, const char* what) {
  double error = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, 0.0, std::numbers::pi / 2, 20, 1e-13, &error);
  if (!(error <= 1e-9) || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << "p_ball: quadrature for " << what << " did not converge (error estimate " << error << ")";
    throw NumericError(msg.str());
  }
  return v;
}

}  // namespace

PballResult p_ball(double nu, std::size_t k, double radius) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw DomainError("p_ball: nu must be finite and >= 0");
  if (k < 1) throw DomainError("p_ball: k must be >= 1");
  if (!(radius > 0.0)) throw DomainError("p_ball: radius must be > 0");

  PballResult r;
  r.method = PballMethod::quadrature;
  fill_bounds(r, nu, k, radius);

  const double scale = std::sqrt(1.0 + nu);
  const double g_max = radius / scale;
  if (k == 1) {
    r.value = rngstat::erf(g_max / std::numbers::sqrt2);
    r.complement = rngstat::erfc(g_max / std::numbers::sqrt2);
    return r;
  }
  const double dof = static_cast<double>(k - 1);
  const double r2 = radius * radius;
  const double phi0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  // g = g_max sin(t): the chi-square argument becomes R^2 cos^2(t), smooth at t = pi/2.
  auto density = [&](double t) {
    const double g = g_max * std::sin(t);
    return 2.0 * phi0 * std::exp(-0.5 * g * g) * g_max * std::cos(t);
  };
  auto inside = [&](double t) {
    const double c = std::cos(t);
    return density(t) * rngstat::chi2_cdf(r2 * c * c, dof);
  };
  auto outside = [&](double t) {
    const double c = std::cos(t);
    return density(t) * rngstat::chi2_sf(r2 * c * c, dof);
  };
  const double in = integrate_half_period(inside, "Pr(ball)");
  const double out = integrate_half_period(outside, "Pr(outside ball)") + 2.0 * rngstat::normal_sf(g_max);
  // Report each side from whichever integral is the small one.
  if (in <= out) {
    r.value = in;
    r.complement = 1.0 - in;
  } else {
    r.value = 1.0 - out;
    r.complement = out;
  }
  r.value = std::clamp(r.value, 0.0, 1.0);
  r.complement = std::clamp(r.complement, 0.0, 1.0);
  return r;
}

PballResult p_ball_monte_carlo(double nu, std::size_t k, double radius, std::size_t samples,
                               rngstat::RngStream& rng) {
  if (!(nu >= 0.0)) throw DomainError("p_ball_monte_carlo: nu must be >= 0");
  if (k < 1 || samples < 1) throw DomainError("p_ball_monte_carlo: k and samples must be >= 1");
  // Rotation invariance: u = e_1.
  constexpr std::size_t kBlock = 8192;
  const std::size_t blocks = (samples + kBlock - 1) / kBlock;
  const std::uint64_t family = rng.next_u64();
  const double sqrt_nu = std::sqrt(nu);
  const double r2 = radius * radius;
  std::size_t hits = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : hits)
  for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(blocks); ++bi) {
    const auto b = static_cast<std::size_t>(bi);
    rngstat::RngStream local(rng.master_seed(), rngstat::derive_stream_id(family, b));
    const std::size_t end = std::min(samples, (b + 1) * kBlock);
    for (std::size_t s = b * kBlock; s < end; ++s) {
      const double x0 = sqrt_nu * local.gaussian() + local.gaussian();
      double n2 = x0 * x0;
      for (std::size_t j = 1; j < k; ++j) {
        const double z = local.gaussian();
        n2 += z * z;
      }
      if (n2 <= r2) ++hits;
    }
  }
  PballResult r;
  r.method = PballMethod::monte_carlo;
  fill_bounds(r, nu, k, radius);
  const double n = static_cast<double>(samples);
  r.value = static_cast<double>(hits) / n;
  r.complement = static_cast<double>(samples - hits) / n;
  r.standard_error = std::sqrt(r.value * r.complement / n);
  return r;
}

double estimate_nu(double p_observed, std::size_t k, double radius) {
  if (!(p_observed > 0.0 && p_observed < 1.0))
    throw DomainError("estimate_nu: p_observed must lie in (0, 1)");
  const double q_observed = 1.0 - p_observed;
  // Compare on whichever side (p or 1 - p) keeps relative precision.
  const bool use_complement = p_observed > 0.5;
  auto excess = [&](double nu) {
    const auto r = p_ball(nu, k, radius);
    return use_complement ? q_observed - r.complement : r.value - p_observed;
  };

  if (excess(0.0) <= 0.0) {
    const auto r0 = p_ball(0.0, k, radius);
    if (p_observed > r0.value + 1e-12) {
      std::ostringstream msg;
      msg << "estimate_nu: p_observed " << p_observed << " exceeds p_ball(0) = " << r0.value;
      throw DomainError(msg.str());
    }
    return 0.0;
  }
  constexpr double kNuMax = 1e12;
  double hi = 1.0;
  while (excess(hi) > 0.0) {
    if (hi >= kNuMax) {
      std::ostringstream msg;
      msg << "estimate_nu: p_observed " << p_observed << " is below p_ball(" << kNuMax << ")";
      throw DomainError(msg.str());
    }
    hi *= 4.0;
  }
  double lo_t = 0.0;
  double hi_t = std::log1p(hi);
  for (int it = 0; it < 200 && hi_t - lo_t > 1e-13; ++it) {
    const double mid = 0.5 * (lo_t + hi_t);
    if (excess(std::expm1(mid)) > 0.0) {
      lo_t = mid;
    } else {
      hi_t = mid;
    }
  }
  return std::expm1(0.5 * (lo_t + hi_t));
}

TruncatedEigenvalues truncated_eigenvalues(std::span<const double> lambdas, double radius,
                                           std::size_t n_mc, rngstat::RngStream& rng) {
  const std::size_t k = lambdas.size();
  if (k == 0) throw DomainError("truncated_eigenvalues: empty eigenvalue list");
  for (double l : lambdas)
    if (!(l > 0.0)) throw DomainError("truncated_eigenvalues: eigenvalues must be > 0");
  if (n_mc < 10000) throw DomainError("truncated_eigenvalues: n_mc must be >= 1e4");
  if (!(radius > 0.0)) throw DomainError("truncated_eigenvalues: radius must be > 0");

  const double r2 = radius * radius;
  std::size_t top = 0;
  for (std::size_t i = 1; i < k; ++i)
    if (lambdas[i] > lambdas[top]) top = i;

  // Pilot run decides between rejection and importance sampling.
  constexpr std::size_t kPilot = 4000;
  std::size_t pilot_hits = 0;
  {
    rngstat::RngStream pilot = rng.substream(~std::uint64_t{0});
    for (std::size_t d = 0; d < kPilot; ++d) {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double g = pilot.gaussian();
        s += lambdas[i] * g * g;
      }
      if (s <= r2) ++pilot_hits;
    }
  }
  const bool importance = k > 1 && pilot_hits < kPilot / 100;

  constexpr std::size_t kDrawsPerBlock = 4096;
  const std::size_t blocks = (n_mc + kDrawsPerBlock - 1) / kDrawsPerBlock;
  const std::uint64_t family = rng.next_u64();
  std::vector<RatioAccumulator> partial(blocks, RatioAccumulator(k));

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(blocks); ++bi) {
    const auto b = static_cast<std::size_t>(bi);
    rngstat::RngStream local(rng.master_seed(), rngstat::derive_stream_id(family, b));
    std::vector<double> f(k);
    const std::size_t end = std::min(n_mc, (b + 1) * kDrawsPerBlock);
    for (std::size_t d = b * kDrawsPerBlock; d < end; ++d) {
      double weight = 0.0;
      if (!importance) {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
          const double g = local.gaussian();
          f[i] = lambdas[i] * g * g;
          s += f[i];
        }
        weight = s <= r2 ? 1.0 : 0.0;
      } else {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
          if (i == top) continue;
          const double g = local.gaussian();
          f[i] = lambdas[i] * g * g;
          s += f[i];
        }
        const double budget = r2 - s;
        if (budget > 0.0) {
          const double c = std::sqrt(budget / lambdas[top]);
          const double g = truncated_normal(c, local);
          f[top] = lambdas[top] * g * g;
          weight = rngstat::erf(c / std::numbers::sqrt2);
        }
      }
      partial[b].add(weight, f);
    }
  }
  RatioAccumulator total(k);
  for (const auto& p : partial) total.merge(p);

  if (total.accepted() < 100) {
    std::ostringstream msg;
    msg << "truncated_eigenvalues: only " << total.accepted() << " of " << total.draws()
        << " draws accepted (need >= 100)";
    throw EstimationError(msg.str());
  }
  TruncatedEigenvalues out;
  out.mu.resize(k);
  out.standard_error.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.mu[i] = total.mean(i);
    out.standard_error[i] = total.standard_error(i);
  }
  out.draws = total.draws();
  out.accepted = total.accepted();
  out.importance_sampled = importance;
  return out;
}

double theorem1_bound(std::size_t k, double n, double nu) {
  if (!(nu >= 1.0)) throw DomainError("theorem1_bound: nu must be >= 1");
  if (k < 1 || !(n > 0.0)) throw DomainError("theorem1_bound: k and n must be positive");
  const double kd = static_cast<double>(k);
  if (nu <= kd) {
    const double ratio = kd / n;
    return std::max(ratio, std::sqrt(ratio)) / std::sqrt(nu);
  }
  return std::sqrt(nu) / n + std::sqrt(std::sqrt(nu / kd) / n);
}

}  // namespace modspike::estimator
