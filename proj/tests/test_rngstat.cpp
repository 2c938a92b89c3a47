#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <vector>

#include "modspike/error.hpp"
#include "modspike/rng.hpp"
#include "modspike/stats.hpp"

using namespace modspike;
using rngstat::RngStream;

namespace {

// Maclaurin series in long double, independent of the library's series form.
long double erf_taylor(long double x) {
  long double term = x, sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / n;
    const long double add = term / (2 * n + 1);
    sum += add;
    if (std::fabs(add) < 1e-30L) break;
  }
  return sum * 2.0L / std::sqrt(std::numbers::pi_v<long double>);
}

// Closed form for even degrees of freedom: 1 - e^{-x/2} sum_{j < dof/2} (x/2)^j / j!.
long double chi2_cdf_even(long double x, int dof) {
  long double term = 1.0L, sum = 0.0L;
  for (int j = 0; j < dof / 2; ++j) {
    if (j > 0) term *= (x / 2) / j;
    sum += term;
  }
  return 1.0L - std::exp(-x / 2) * sum;
}

}  // namespace

TEST_CASE("philox known answers") {
  // Reference vectors published with the Random123 library.
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  CHECK(rngstat::philox4x32(A4{0, 0, 0, 0}, A2{0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(rngstat::philox4x32(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(rngstat::philox4x32(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  std::vector<std::uint64_t> va, vb, vc, vd;
  for (int i = 0; i < 1000; ++i) {
    va.push_back(a.next_u64());
    vb.push_back(b.next_u64());
    vc.push_back(c.next_u64());
    vd.push_back(d.next_u64());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
  std::set<std::uint64_t> all(va.begin(), va.end());
  all.insert(vc.begin(), vc.end());
  CHECK(all.size() == 2000);

  RngStream s(1, 2);
  const auto sub1 = s.substream(5);
  s.next_u64();
  auto sub2 = s.substream(5);
  auto sub1c = sub1;
  CHECK(sub1c.next_u64() == sub2.next_u64());

  RngStream g1(9, 9), g2(9, 9);
  CHECK(rngstat::gaussian_vector(17, g1) == rngstat::gaussian_vector(17, g2));
}

TEST_CASE("uniform lies in the open unit interval") {
  RngStream r(3, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::fabs(sum / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("gaussian_vector moments") {
  RngStream r(11, 0);
  const std::size_t n = 1000000;
  const auto v = rngstat::gaussian_vector(n, r);
  double m = 0.0, s2 = 0.0, m4 = 0.0;
  for (double x : v) m += x;
  m /= n;
  for (double x : v) {
    s2 += (x - m) * (x - m);
    m4 += x * x * x * x;
  }
  s2 /= n - 1;
  m4 /= n;
  CHECK(std::fabs(m) < 5.0 / std::sqrt(double(n)));
  CHECK(s2 > 0.99);
  CHECK(s2 < 1.01);
  CHECK(m4 == doctest::Approx(3.0).epsilon(0.02));
}

TEST_CASE("uniform_sphere") {
  RngStream r(5, 1);
  for (std::size_t dim : {1u, 2u, 3u, 50u, 400u}) {
    const auto v = rngstat::uniform_sphere(dim, r);
    double s = 0.0;
    for (double x : v) s += x * x;
    CHECK(std::fabs(std::sqrt(s) - 1.0) < 1e-12);
    if (dim == 1) CHECK(std::fabs(v[0]) == 1.0);
  }
  const std::size_t dim = 50, draws = 100000;
  std::vector<double> var(dim, 0.0);
  for (std::size_t d = 0; d < draws; ++d) {
    const auto v = rngstat::uniform_sphere(dim, r);
    for (std::size_t i = 0; i < dim; ++i) var[i] += v[i] * v[i];
  }
  for (double s : var) {
    CHECK(s / draws > 0.8 / dim);
    CHECK(s / draws < 1.2 / dim);
  }
}

TEST_CASE("tail thresholds") {
  CHECK(rngstat::tail_thresholds(9, 1.0).z2 == doctest::Approx(3.0).epsilon(1e-15));
  const auto t = rngstat::tail_thresholds(4, 0.1);
  // Evaluated independently in 50-digit arithmetic.
  CHECK(std::fabs(t.z2 - 3.8307804300858432) < 1e-13);
  CHECK(std::fabs(t.z2 - 3.8309) < 5e-4);
  CHECK(std::fabs(t.h - std::sqrt(2.0 * std::log(20.0))) < 1e-14);
  CHECK(std::fabs(t.z_inf - (std::sqrt(2.0 * std::log(4.0)) + t.h)) < 1e-14);

  for (std::size_t k = 1; k < 60; ++k) {
    CHECK(rngstat::tail_thresholds(k + 1, 0.1).z2 > rngstat::tail_thresholds(k, 0.1).z2);
    CHECK(rngstat::tail_thresholds(k, 0.05).z2 > rngstat::tail_thresholds(k, 0.1).z2);
    CHECK(rngstat::tail_thresholds(k, 0.05).h > rngstat::tail_thresholds(k, 0.1).h);
  }
  CHECK_THROWS_AS(rngstat::tail_thresholds(4, 0.0), DomainError);
  CHECK_THROWS_AS(rngstat::tail_thresholds(4, 1.5), DomainError);
  CHECK_THROWS_AS(rngstat::tail_thresholds(0, 0.5), DomainError);

  // Monte-Carlo tail: Pr(|Z| >= z2) <= 0.1.
  for (std::size_t k : {1u, 5u, 30u}) {
    RngStream r(77, k);
    const double z2 = rngstat::tail_thresholds(k, 0.1).z2;
    const int n = 100000;
    int over = 0;
    for (int i = 0; i < n; ++i) {
      const auto z = rngstat::gaussian_vector(k, r);
      double s = 0.0;
      for (double x : z) s += x * x;
      if (std::sqrt(s) >= z2) ++over;
    }
    const double p = double(over) / n;
    CHECK(p <= 0.1 + 3.0 * std::sqrt(0.1 * 0.9 / n));
  }
}

TEST_CASE("erf against independent oracles") {
  CHECK(rngstat::erf(0.0) == 0.0);
  CHECK(std::fabs(rngstat::erf(1.0) - 0.8427007929497149) < 1e-15);
  CHECK(rngstat::erf(40.0) == 1.0);
  CHECK(rngstat::erf(-40.0) == -1.0);
  for (double x = -2.0; x <= 2.0; x += 0.01) {
    CHECK(std::fabs(rngstat::erf(x) - static_cast<double>(erf_taylor(x))) < 1e-14);
    CHECK(rngstat::erf(-x) == -rngstat::erf(x));
  }
  double prev = -1.0;
  for (double x = -7.0; x <= 7.0; x += 0.003) {
    const double v = rngstat::erf(x);
    CHECK(std::fabs(v - std::erf(x)) < 1e-12);
    CHECK(v >= prev);
    prev = v;
  }
  for (double x = 0.5; x < 26.0; x += 0.25)
    CHECK(std::fabs(rngstat::erfc(x) / std::erfc(x) - 1.0) < 1e-12);
  for (double x = -5.0; x < 35.0; x += 0.5)
    CHECK(std::fabs(rngstat::normal_sf(x) - 0.5 * std::erfc(x / std::numbers::sqrt2)) <=
          1e-12 * 0.5 * std::erfc(x / std::numbers::sqrt2) + 1e-300);
}

TEST_CASE("erf matches Monte-Carlo mass of a symmetric interval") {
  RngStream r(123, 0);
  const int n = 1000000;
  const double x = 0.8;
  int inside = 0;
  for (int i = 0; i < n; ++i)
    if (std::fabs(r.gaussian()) <= std::numbers::sqrt2 * x) ++inside;
  const double p = rngstat::erf(x);
  CHECK(std::fabs(double(inside) / n - p) <= 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("chi-square distribution") {
  for (int dof : {2, 4, 10, 20, 40})
    for (double x : {0.1, 1.0, 5.0, 17.0, 60.0, 150.0}) {
      const long double ref = chi2_cdf_even(x, dof);
      CHECK(std::fabs(rngstat::chi2_cdf(x, dof) - double(ref)) < 1e-14);
      if (ref > 1e-3L) CHECK(std::fabs(rngstat::chi2_sf(x, dof) - double(1.0L - ref)) < 1e-14);
    }
  for (double x : {0.01, 0.5, 2.0, 9.0})
    CHECK(std::fabs(rngstat::chi2_cdf(x, 1) - std::erf(std::sqrt(x / 2))) < 1e-14);
  CHECK(rngstat::chi2_cdf(0.0, 0) == 1.0);
  CHECK(rngstat::chi2_cdf(-1.0, 3) == 0.0);
  CHECK(rngstat::chi2_sf(1e4, 10) < 1e-300);
}
