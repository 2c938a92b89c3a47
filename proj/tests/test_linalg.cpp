#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "modspike/error.hpp"
#include "modspike/integer_matrix.hpp"
#include "modspike/linalg.hpp"
#include "modspike/rng.hpp"

using namespace modspike;
using linalg::BigInt;
using linalg::IntegerMatrix;
using linalg::Matrix;
using linalg::SymMatrix;

namespace {

SymMatrix random_symmetric(std::size_t n, rngstat::RngStream& r) {
  SymMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) a.set(i, j, r.gaussian());
  return a;
}

SymMatrix random_spd(std::size_t n, rngstat::RngStream& r) {
  Matrix g(n, n);
  for (double& v : g.data()) v = r.gaussian();
  SymMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = i == j ? 0.5 : 0.0;
      for (std::size_t l = 0; l < n; ++l) s += g(i, l) * g(j, l);
      a.set(i, j, s);
    }
  return a;
}

// Leibniz expansion over permutations.
BigInt leibniz(const IntegerMatrix& a) {
  const std::size_t n = a.dim();
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  BigInt total = 0;
  do {
    int inversions = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (p[i] > p[j]) ++inversions;
    BigInt term = inversions % 2 ? -1 : 1;
    for (std::size_t i = 0; i < n; ++i) term *= a(i, p[i]);
    total += term;
  } while (std::next_permutation(p.begin(), p.end()));
  return total;
}

IntegerMatrix random_unimodular(std::size_t n, int shears, rngstat::RngStream& r) {
  IntegerMatrix u = IntegerMatrix::identity(n);
  for (int s = 0; s < shears; ++s) {
    const std::size_t i = r.next_u64() % n;
    std::size_t j = r.next_u64() % n;
    if (i == j) j = (j + 1) % n;
    const long long c = static_cast<long long>(r.next_u64() % 7) - 3;
    for (std::size_t col = 0; col < n; ++col) u(i, col) += c * u(j, col);
  }
  return u;
}

}  // namespace

TEST_CASE("sym_eig basics") {
  const auto id = linalg::sym_eig(SymMatrix::identity(4));
  for (double l : id.eigenvalues) CHECK(l == doctest::Approx(1.0));

  SymMatrix d(2);
  d.set(0, 0, 1.0);
  d.set(1, 1, 3.0);
  const auto e = linalg::sym_eig(d);
  CHECK(e.eigenvalues[0] == doctest::Approx(3.0));
  CHECK(e.eigenvalues[1] == doctest::Approx(1.0));
  CHECK(e.vector(0)[1] == doctest::Approx(1.0));
  CHECK(std::fabs(e.vector(0)[0]) < 1e-15);

  // 2x2 closed form.
  SymMatrix b(2);
  b.set(0, 0, 2.0);
  b.set(0, 1, 1.0);
  b.set(1, 1, 2.0);
  const auto f = linalg::sym_eig(b);
  CHECK(f.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(f.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.vector(0)[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
}

TEST_CASE("sym_eig residuals, orthonormality, reconstruction, sign rule") {
  rngstat::RngStream r(1, 0);
  for (std::size_t n : {1u, 3u, 8u, 20u, 60u}) {
    const auto a = random_symmetric(n, r);
    const auto e = linalg::sym_eig(a);
    for (std::size_t i = 0; i + 1 < n; ++i) CHECK(e.eigenvalues[i] >= e.eigenvalues[i + 1]);
    const double scale = 1.0 + std::fabs(e.eigenvalues[0]);
    double max_resid = 0.0, max_orth = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = e.vector(i);
      const auto av = a.matrix() * std::span<const double>(v);
      double res = 0.0;
      for (std::size_t r2 = 0; r2 < n; ++r2) res += std::pow(av[r2] - e.eigenvalues[i] * v[r2], 2);
      max_resid = std::max(max_resid, std::sqrt(res));
      for (std::size_t j = 0; j < n; ++j)
        max_orth = std::max(max_orth, std::fabs(linalg::dot(v, e.vector(j)) - (i == j ? 1.0 : 0.0)));
      const auto big = std::max_element(v.begin(), v.end(), [](double x, double y) { return std::fabs(x) < std::fabs(y); });
      CHECK(*big > 0.0);
    }
    CHECK(max_resid < 1e-10 * scale);
    CHECK(max_orth < 1e-10);
    Matrix rec(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = 0; l < n; ++l)
          rec(i, j) += e.eigenvectors(i, l) * e.eigenvalues[l] * e.eigenvectors(j, l);
    double diff = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) diff += std::pow(rec.data()[i] - a.matrix().data()[i], 2);
    CHECK(std::sqrt(diff) / linalg::frobenius(a.matrix()) < 1e-9);
  }
}

TEST_CASE("spiked covariance eigenpairs") {
  const std::vector<double> u = {0.6, 0.0, 0.8};
  const auto s = linalg::spiked_covariance(u, 24.0);
  const auto e = linalg::sym_eig(s);
  CHECK(e.eigenvalues[0] == doctest::Approx(25.0).epsilon(1e-14));
  CHECK(e.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::fabs(linalg::dot(e.vector(0), u)) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("SymMatrix symmetry") {
  Matrix m(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(SymMatrix{m}, DomainError);
  m(1, 0) = 1.0;
  CHECK_NOTHROW(SymMatrix{m});
}

TEST_CASE("cholesky") {
  SymMatrix a(2);
  a.set(0, 0, 4.0);
  a.set(0, 1, 2.0);
  a.set(1, 1, 2.0);
  const auto l = linalg::cholesky(a);
  CHECK(l(0, 0) == 2.0);
  CHECK(l(1, 0) == 1.0);
  CHECK(l(1, 1) == 1.0);
  CHECK(l(0, 1) == 0.0);
  CHECK(linalg::cholesky(SymMatrix::identity(3)) == Matrix::identity(3));

  SymMatrix bad(2);
  bad.set(0, 0, 1.0);
  bad.set(0, 1, 2.0);
  bad.set(1, 1, 1.0);
  CHECK_THROWS_AS(linalg::cholesky(bad), DomainError);

  rngstat::RngStream r(2, 0);
  for (std::size_t n : {2u, 7u, 30u}) {
    const auto s = random_spd(n, r);
    const auto c = linalg::cholesky(s);
    const auto rec = c * c.transpose();
    double diff = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) diff += std::pow(rec.data()[i] - s.matrix().data()[i], 2);
    CHECK(std::sqrt(diff) / linalg::frobenius(s.matrix()) < 1e-10);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(c(i, i) > 0.0);
      for (std::size_t j = i + 1; j < n; ++j) CHECK(c(i, j) == 0.0);
    }
  }
}

TEST_CASE("spd inverse and power") {
  rngstat::RngStream r(3, 0);
  const auto s = random_spd(6, r);
  const auto inv = linalg::spd_inverse(s);
  const auto prod = s.matrix() * inv.matrix();
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) CHECK(std::fabs(prod(i, j) - (i == j ? 1.0 : 0.0)) < 1e-9);
  const auto h = linalg::spd_power(s, -0.5).matrix();
  const auto t = h * s.matrix() * h;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) CHECK(std::fabs(t(i, j) - (i == j ? 1.0 : 0.0)) < 1e-9);
}

TEST_CASE("integer determinant matches Leibniz expansion") {
  rngstat::RngStream r(4, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 5;
    IntegerMatrix a(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) = static_cast<long long>(r.next_u64() % 21) - 10;
    CHECK(linalg::determinant(a) == leibniz(a));
  }
  // Entries past 64 bits.
  IntegerMatrix big(2);
  big(0, 0) = BigInt(1) << 80;
  big(0, 1) = 3;
  big(1, 0) = 5;
  big(1, 1) = BigInt(1) << 70;
  CHECK(linalg::determinant(big) == (BigInt(1) << 150) - 15);
}

TEST_CASE("unimodular inverse") {
  CHECK(linalg::unimodular_inverse(IntegerMatrix::identity(3)).is_identity());
  const IntegerMatrix shear(2, {1, 1, 0, 1});
  CHECK(linalg::unimodular_inverse(shear) == IntegerMatrix(2, {1, -1, 0, 1}));
  CHECK_THROWS_AS(linalg::unimodular_inverse(IntegerMatrix(2, {2, 0, 0, 1})), DomainError);
  CHECK_THROWS_AS(linalg::unimodular_inverse(IntegerMatrix(2, {1, 2, 2, 4})), DomainError);

  rngstat::RngStream r(5, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const auto u = random_unimodular(n, 40, r);
    const auto inv = linalg::unimodular_inverse(u);
    CHECK((u * inv).is_identity());
    CHECK((inv * u).is_identity());
    CHECK(abs(linalg::determinant(u)) == 1);
  }
}

TEST_CASE("IntegerMatrix conversions") {
  IntegerMatrix a(2, {1, -2, 3, 4});
  CHECK(a.to_int64().value() == std::vector<std::int64_t>{1, -2, 3, 4});
  CHECK(a.to_double() == std::vector<double>{1, -2, 3, 4});
  CHECK(a.max_abs() == 4);
  CHECK(a.transpose() == IntegerMatrix(2, {1, 3, -2, 4}));
  a(0, 0) = BigInt(1) << 70;
  CHECK_FALSE(a.to_int64().has_value());
}
