#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "modspike/ball_sampler.hpp"
#include "modspike/error.hpp"
#include "modspike/estimator.hpp"
#include "modspike/kernels.hpp"
#include "modspike/model.hpp"

using namespace modspike;
using estimator::p_ball;
using linalg::Matrix;

namespace {

constexpr long double kPi = std::numbers::pi_v<long double>;

long double phi(long double g) { return std::exp(-0.5L * g * g) / std::sqrt(2.0L * kPi); }

long double chi2_cdf_even(long double x, int dof) {
  if (x <= 0) return 0.0L;
  long double term = 1.0L, sum = 0.0L;
  for (int j = 0; j < dof / 2; ++j) {
    if (j > 0) term *= (x / 2) / j;
    sum += term;
  }
  return 1.0L - std::exp(-x / 2) * sum;
}

// Pr((1+nu) g^2 + W <= R^2) for odd k by composite Simpson over g, with the
// closed-form even-dof chi-square cdf.
double p_ball_simpson(double nu, int k, double radius) {
  const long double gmax = radius / std::sqrt(1.0L + nu);
  const int m = 200000;
  const long double h = gmax / m;
  long double s = 0.0L;
  for (int i = 0; i <= m; ++i) {
    const long double g = i * h;
    const long double f = 2.0L * phi(g) * chi2_cdf_even(radius * (long double)radius - (1.0L + nu) * g * g, k - 1);
    s += f * (i == 0 || i == m ? 1 : (i % 2 ? 4 : 2));
  }
  return static_cast<double>(s * h / 3.0L);
}

// E[lambda_i g_i^2 | lambda_1 g_1^2 + lambda_2 g_2^2 <= R^2] by quadrature over
// g_2 = b sin(t), integrating g_1 in closed form.
std::pair<double, double> truncated_pair(double l1, double l2, double radius) {
  const double b = radius / std::sqrt(l2);
  const int m = 20000;
  const double h = (std::numbers::pi / 2) / m;
  double d = 0, n1 = 0, n2 = 0;
  for (int i = 0; i <= m; ++i) {
    const double t = i * h;
    const double g2 = b * std::sin(t);
    const double c = radius * std::cos(t) / std::sqrt(l1);
    const double mass = std::erf(c / std::numbers::sqrt2);
    const double second = mass - 2.0 * c * std::exp(-0.5 * c * c) / std::sqrt(2.0 * std::numbers::pi);
    const double jac = 2.0 * std::exp(-0.5 * g2 * g2) / std::sqrt(2.0 * std::numbers::pi) * b * std::cos(t);
    const double w = (i == 0 || i == m ? 1 : (i % 2 ? 4 : 2)) * jac;
    d += w * mass;
    n1 += w * l1 * second;
    n2 += w * l2 * g2 * g2 * mass;
  }
  return {n1 / d, n2 / d};
}

}  // namespace

TEST_CASE("default radius") {
  CHECK(std::fabs(estimator::default_radius(4) - 7.830780430085843) < 1e-13);
  CHECK(std::fabs(estimator::default_radius(20) - 15.123062328423977) < 1e-12);
  for (std::size_t k = 1; k < 500; ++k) CHECK(estimator::default_radius(k + 1) > estimator::default_radius(k));
}

TEST_CASE("p_ball at nu = 0 and k = 1") {
  for (int k : {2, 4, 10, 20, 50})
    for (double r : {1.0, 3.0, estimator::default_radius(k)}) {
      const auto p = p_ball(0.0, k, r);
      CHECK(std::fabs(p.value - double(chi2_cdf_even(r * r, k))) < 1e-10);
      CHECK(p.method == estimator::PballMethod::quadrature);
    }
  for (double nu : {0.0, 3.0, 1e4}) {
    const auto p = p_ball(nu, 1, 2.5);
    CHECK(std::fabs(p.value - std::erf(2.5 / std::sqrt(2.0 * (1.0 + nu)))) < 1e-15);
  }
}

TEST_CASE("p_ball against an independent quadrature") {
  for (int k : {3, 5, 21})
    for (double nu : {0.5, 7.0, 300.0, 5e4})
      for (double r : {2.0, estimator::default_radius(k)}) {
        const auto p = p_ball(nu, k, r);
        CHECK(std::fabs(p.value - p_ball_simpson(nu, k, r)) < 1e-9);
        CHECK(std::fabs(p.value + p.complement - 1.0) < 1e-12);
      }
  // High-precision reference values at k = 20 and the default radius.
  const double r20 = estimator::default_radius(20);
  CHECK(std::fabs(p_ball(400, 20, r20).value - 0.53034450112477) < 1e-12);
  CHECK(std::fabs(p_ball(4000, 20, r20).value - 0.18106422684371) < 1e-12);
}

TEST_CASE("p_ball bracket and monotonicity") {
  for (std::size_t k : {2u, 5u, 20u, 60u}) {
    const double r = estimator::default_radius(k);
    double prev = 2.0;
    for (double nu : {0.0, 0.1, 1.0, 5.0, double(k), 30.0, 100.0 * k, 1e5, 1e8}) {
      const auto p = p_ball(nu, k, r);
      CHECK(p.value >= 0.0);
      CHECK(p.value <= 1.0);
      CHECK(p.lower_bound <= p.upper_bound);
      CHECK(p.value >= p.lower_bound - 1e-9);
      CHECK(p.value <= p.upper_bound + 1e-9);
      if (nu > 0) CHECK(std::fabs(p.lower_bound - 0.9 * std::erf(std::sqrt(2.0 * k / nu))) < 1e-12);
      CHECK(std::fabs(p.upper_bound - std::erf(r / std::sqrt(2.0 * (1.0 + nu)))) < 1e-14);
      if (p.value < 0.999) CHECK(p.value < prev - 1e-8);
      prev = p.value;
    }
    double prev_r = -1.0;
    for (double rr = 0.5; rr < 3 * r; rr += 0.5) {
      const double v = p_ball(50.0, k, rr).value;
      if (v < 0.999) CHECK(v > prev_r);
      prev_r = v;
    }
  }
  CHECK_THROWS_AS(p_ball(-1.0, 3, 1.0), DomainError);
  CHECK_THROWS_AS(p_ball(1.0, 0, 1.0), DomainError);
  CHECK_THROWS_AS(p_ball(1.0, 3, 0.0), DomainError);
}

TEST_CASE("p_ball against Monte Carlo") {
  rngstat::RngStream r(21, 0);
  const std::size_t k = 10;
  const double rad = estimator::default_radius(k);
  const auto q = p_ball(1000.0, k, rad);
  const auto mc = estimator::p_ball_monte_carlo(1000.0, k, rad, 1000000, r);
  CHECK(mc.method == estimator::PballMethod::monte_carlo);
  CHECK(std::fabs(q.value - mc.value) <= 3.0 * std::sqrt(q.value * q.complement / 1e6));
}

TEST_CASE("estimate_nu") {
  const std::size_t k = 20;
  const double r = estimator::default_radius(k);
  // At the default radius p_ball(0) rounds to 1; use a smaller ball for the endpoint.
  CHECK(estimator::estimate_nu(p_ball(0.0, k, 5.0).value, k, 5.0) <= 1e-4);
  for (double nu : {0.3, 5.0, 400.0, 4000.0, 1e6}) {
    const auto p = p_ball(nu, k, r);
    if (p.value >= 1.0) continue;
    const double est = estimator::estimate_nu(p.value, k, r);
    CHECK(std::fabs(est - nu) / nu <= 0.02);
    CHECK(std::fabs(p_ball(est, k, r).value - p.value) <= 1e-6);
  }
  // p from 1e6 Monte-Carlo samples, k = 10, nu = 100.
  rngstat::RngStream rng(22, 0);
  const double r10 = estimator::default_radius(10);
  const auto mc = estimator::p_ball_monte_carlo(100.0, 10, r10, 1000000, rng);
  CHECK(std::fabs(estimator::estimate_nu(mc.value, 10, r10) - 100.0) / 100.0 <= 0.10);

  CHECK_THROWS_AS(estimator::estimate_nu(0.0, k, r), DomainError);
  CHECK_THROWS_AS(estimator::estimate_nu(1.0, k, r), DomainError);
  CHECK_THROWS_AS(estimator::estimate_nu(0.9, 3, 0.5), DomainError);
  CHECK_THROWS_AS(estimator::estimate_nu(1e-300, k, r), DomainError);
}

TEST_CASE("estimate_spike on constructed data") {
  const std::vector<double> u = {0.6, -0.8};
  Matrix y(6, 2);
  const double a[6] = {1.0, -2.0, 0.5, 3.0, 100.0, -80.0};
  for (int i = 0; i < 6; ++i) {
    y(i, 0) = a[i] * u[0];
    y(i, 1) = a[i] * u[1];
  }
  y(4, 1) = 5.0;  // outside the ball, would tilt the estimate
  const auto est = estimator::estimate_spike(y, 10.0);
  CHECK(est.n_selected == 4);
  CHECK(est.n_total == 6);
  CHECK(est.radius_used == 10.0);
  CHECK(est.rank_deficient == false);
  CHECK(std::fabs(linalg::norm2(est.u_hat) - 1.0) < 1e-12);
  CHECK(est.u_hat[1] == doctest::Approx(0.8).epsilon(1e-12));  // sign rule: |-0.8| largest -> positive
  CHECK(est.u_hat[0] == doctest::Approx(-0.6).epsilon(1e-12));
  CHECK(est.eigenvalues[0] == doctest::Approx((1 + 4 + 0.25 + 9) / 4.0).epsilon(1e-12));
  CHECK(std::fabs(est.eigenvalues[1]) < 1e-12);

  CHECK_THROWS_AS(estimator::estimate_spike(y, 0.1), EstimationError);
  Matrix one(1, 3);
  one(0, 0) = 0.5;
  CHECK(estimator::estimate_spike(one, 1.0).rank_deficient);
}

TEST_CASE("estimate_spike: blind contract, permutation equivariance, no folding limit") {
  rngstat::RngStream r(23, 0);
  const std::size_t k = 6, n = 3000;
  const double delta = 5.0;
  const auto m = model::SpikedModel::random_direction(k, 60.0, r);
  auto x = model::sample_spiked(m, n, r);
  const auto y = model::apply_channel(x, model::ModuloChannel(delta));
  const double rad = estimator::default_radius(k);
  const auto e1 = estimator::estimate_spike(y, rad);

  // A different X with the same folding gives the same estimate.
  for (std::size_t i = 0; i < n; i += 7) x(i, 0) += 3 * delta;
  const auto e_shift = estimator::estimate_spike(model::apply_channel(x, model::ModuloChannel(delta)), rad);
  CHECK(e_shift.n_selected == e1.n_selected);
  for (std::size_t j = 0; j < k; ++j) CHECK(e_shift.u_hat[j] == doctest::Approx(e1.u_hat[j]).epsilon(1e-9));

  // Permuting coordinates permutes the estimate.
  const std::vector<std::size_t> perm = {3, 0, 5, 1, 4, 2};
  Matrix yp(n, k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) yp(i, j) = y(i, perm[j]);
  const auto ep = estimator::estimate_spike(yp, rad);
  for (std::size_t j = 0; j < k; ++j) CHECK(ep.u_hat[j] == doctest::Approx(e1.u_hat[perm[j]]).epsilon(1e-10));

  // Huge delta: plain truncated PCA on X.
  const auto x2 = model::sample_spiked(m, n, r);
  const auto y2 = model::apply_channel(x2, model::ModuloChannel(1e9));
  CHECK(y2 == x2);
  Matrix c(k, k);
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < k; ++j) s += x2(i, j) * x2(i, j);
    if (std::sqrt(s) > rad) continue;
    ++cnt;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) c(a, b) += x2(i, a) * x2(i, b);
  }
  linalg::SymMatrix cs(k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b <= a; ++b) cs.set(a, b, c(a, b) / double(cnt));
  const auto direct = linalg::sym_eig(cs).vector(0);
  const auto e2 = estimator::estimate_spike(y2, rad);
  CHECK(e2.n_selected == cnt);
  for (std::size_t j = 0; j < k; ++j) CHECK(e2.u_hat[j] == doctest::Approx(direct[j]).epsilon(1e-10));
}

TEST_CASE("estimate_spike in the two-dimensional example setup") {
  // k = 2, nu = 1e4, delta = 80, n = 5000 with one fixed direction:
  // |<u_hat, u>| >= 0.99 in at least 95 of 100 trials.
  const double th = std::numbers::pi / 6;
  const model::SpikedModel m(1e4, std::vector<double>{std::cos(th), std::sin(th)});
  int good = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    rngstat::RngStream r(24, t);
    const auto y = model::apply_channel(model::sample_spiked(m, 5000, r), model::ModuloChannel(80.0));
    const auto est = estimator::estimate_spike(y, estimator::default_radius(2));
    if (std::fabs(linalg::dot(est.u_hat, m.u())) >= 0.99) ++good;
  }
  CHECK(good >= 95);
}

TEST_CASE("align_sign and estimation_error") {
  const std::vector<double> u = {0.6, 0.8}, mu = {-0.6, -0.8}, orth = {0.8, -0.6};
  CHECK(estimator::align_sign(u, u) == u);
  CHECK(estimator::align_sign(mu, u) == u);
  CHECK(estimator::align_sign(orth, u) == orth);
  CHECK(estimator::estimation_error(u, mu) == 0.0);
  CHECK(estimator::estimation_error(u, orth) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("truncated_eigenvalues: one dimension, closed form") {
  for (double lambda : {1.0, 9.0, 400.0}) {
    rngstat::RngStream r(25, std::uint64_t(lambda));
    const double rad = 3.0;
    const auto te = estimator::truncated_eigenvalues(std::vector<double>{lambda}, rad, 200000, r);
    const double c = rad / std::sqrt(lambda);
    const double exact = lambda * (1.0 - 2.0 * c * std::exp(-0.5 * c * c) / std::sqrt(2.0 * std::numbers::pi) /
                                             std::erf(c / std::numbers::sqrt2));
    CHECK(std::fabs(te.mu[0] - exact) <= 3.5 * te.standard_error[0]);
    CHECK(te.draws == 200000);
  }
}

TEST_CASE("truncated_eigenvalues: two dimensions against quadrature") {
  struct Case {
    double l1, l2, r;
  };
  for (const auto& cs : {Case{20.0, 1.0, 3.0}, Case{1e6, 1.0, 3.0}, Case{5e4, 2.0, 4.0}}) {
    rngstat::RngStream r(26, std::uint64_t(cs.l1));
    const std::vector<double> lambdas = {cs.l2, cs.l1};  // output keeps input order
    const auto te = estimator::truncated_eigenvalues(lambdas, cs.r, 400000, r);
    const auto [m1, m2] = truncated_pair(cs.l1, cs.l2, cs.r);
    CHECK(std::fabs(te.mu[1] - m1) <= 3.5 * te.standard_error[1]);
    CHECK(std::fabs(te.mu[0] - m2) <= 3.5 * te.standard_error[0]);
    CHECK(te.importance_sampled == (cs.l1 > 1e4));
  }
}

TEST_CASE("truncated_eigenvalues: limits and ordering") {
  rngstat::RngStream r(27, 0);
  const std::vector<double> flat = {2.0, 2.0, 2.0};
  const auto te = estimator::truncated_eigenvalues(flat, std::sqrt(100.0 * 6.0 * 10.0), 100000, r);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::fabs(te.mu[i] - 2.0) <= 3.0 * te.standard_error[i]);

  for (double nu : {1.0, 10.0, 1000.0, 1e6}) {
    const std::size_t k = 8;
    std::vector<double> l(k, 1.0);
    l[0] = 1.0 + nu;
    const double rad = estimator::default_radius(k);
    const auto t = estimator::truncated_eigenvalues(l, rad, 100000, r);
    for (std::size_t i = 1; i < k; ++i) {
      CHECK(t.mu[0] > t.mu[i]);
      CHECK(t.mu[i] <= 1.0 + 3.0 * t.standard_error[i]);
    }
    CHECK(t.mu[0] <= std::min(rad * rad, 1.0 + nu) + 3.0 * t.standard_error[0]);
  }
  CHECK_THROWS_AS(estimator::truncated_eigenvalues(std::vector<double>{1.0, 0.0}, 3.0, 20000, r), DomainError);
  CHECK_THROWS_AS(estimator::truncated_eigenvalues(std::vector<double>{1.0}, 3.0, 9999, r), DomainError);
  CHECK_THROWS_AS(estimator::truncated_eigenvalues(std::vector<double>{1.0}, 1e-4, 10000, r), EstimationError);
}

TEST_CASE("error bound overlay") {
  CHECK(estimator::theorem1_bound(100, 1e4, 10.0) == doctest::Approx(0.0316227766016838).epsilon(1e-12));
  // Seam at nu = k: the sqrt(k/n)/sqrt(nu) term equals the sqrt(sqrt(nu/k)/n) term.
  const double k = 50, n = 2500;
  CHECK(std::sqrt(k / n) / std::sqrt(k) == doctest::Approx(std::sqrt(std::sqrt(k / k) / n)));
  double prev = 0.0;
  for (double nu = 2 * k; nu < 1e7; nu *= 2) {
    const double b = estimator::theorem1_bound(50, n, nu);
    CHECK(b > prev);
    prev = b;
  }
  CHECK_THROWS_AS(estimator::theorem1_bound(5, 10, 0.5), DomainError);
}

TEST_CASE("truncated normal and the ball sampler") {
  rngstat::RngStream r(28, 0);
  for (double c : {0.05, 0.7, 2.5}) {
    double s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double g = estimator::truncated_normal(c, r);
      REQUIRE(std::fabs(g) <= c);
      s2 += g * g;
    }
    const double exact = 1.0 - 2.0 * c * std::exp(-0.5 * c * c) / std::sqrt(2.0 * std::numbers::pi) /
                                   std::erf(c / std::numbers::sqrt2);
    CHECK(s2 / n == doctest::Approx(exact).epsilon(0.02));
  }
  for (double nu : {5.0, 1e7}) {
    const auto m = model::SpikedModel::random_direction(4, nu, r);
    const double rad = estimator::default_radius(4);
    const estimator::SpikedBallSampler s(m, rad);
    CHECK(s.importance_sampled() == (nu > 1e6));
    std::vector<double> x(4);
    for (int i = 0; i < 2000; ++i) {
      const double w = s.draw(r, x);
      if (w > 0) CHECK(linalg::norm2(x) <= rad * (1 + 1e-12));
    }
  }
}

TEST_CASE("ball moment Monte Carlo agrees with truncated eigenvalues") {
  rngstat::RngStream r(29, 0);
  const std::size_t k = 4;
  const double nu = 50.0;
  const auto m = model::SpikedModel::random_direction(k, nu, r);
  const double rad = estimator::default_radius(k);
  const auto eig = linalg::sym_eig(m.covariance());
  const auto mc = estimator::ball_moment_mc(m, rad, eig.eigenvectors.transpose(), 400000, r);
  const auto te = estimator::truncated_eigenvalues(eig.eigenvalues, rad, 400000, r);
  for (std::size_t i = 0; i < k; ++i) {
    const double se = std::hypot(mc.standard_error(i, i), te.standard_error[i]);
    CHECK(std::fabs(mc.mean(i, i) - te.mu[i]) <= 3.5 * se);
  }
}

TEST_CASE("ratio accumulator") {
  estimator::RatioAccumulator a(1), b(1);
  a.add(1.0, std::vector<double>{2.0});
  a.add(0.0, std::vector<double>{100.0});
  b.add(1.0, std::vector<double>{4.0});
  a.merge(b);
  CHECK(a.draws() == 3);
  CHECK(a.accepted() == 2);
  CHECK(a.mean(0) == doctest::Approx(3.0));
  CHECK(a.weight_sum() == 2.0);
}
