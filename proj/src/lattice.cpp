#include "modspike/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "modspike/error.hpp"
#include "modspike/estimator.hpp"
#include "modspike/kernels.hpp"
#include "modspike/model.hpp"

namespace modspike::lattice {

namespace {

using linalg::BigInt;
using Column = std::vector<long double>;

long double ldot(const Column& a, const Column& b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// q is integral.
BigInt to_bigint(long double q) {
  if (std::fabs(q) < 9.0e18L) return BigInt(static_cast<std::int64_t>(q));
  int e = 0;
  const long double m = std::frexp(std::fabs(q), &e);
  BigInt r(static_cast<std::uint64_t>(std::ldexp(m, 64)));
  if (e >= 64) {
    r <<= (e - 64);
  } else {
    r >>= (64 - e);
  }
  return q < 0 ? BigInt(-r) : r;
}

std::vector<Column> columns_of(const Matrix& b) {
  std::vector<Column> cols(b.cols(), Column(b.rows()));
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t i = 0; i < b.rows(); ++i) cols[j][i] = b(i, j);
  return cols;
}

std::vector<Column> product_columns(const Matrix& b, const IntegerMatrix& u) {
  const std::size_t k = b.rows();
  std::vector<Column> cols(k, Column(k, 0.0L));
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t l = 0; l < k; ++l) {
      if (u(l, j) == 0) continue;
      const auto c = u(l, j).convert_to<long double>();
      for (std::size_t i = 0; i < k; ++i) cols[j][i] += static_cast<long double>(b(i, l)) * c;
    }
  return cols;
}

// Gram-Schmidt state for columns b_0..b_{k-1}.
struct GramSchmidt {
  explicit GramSchmidt(std::size_t k) : bstar(k, Column(k)), mu(k, Column(k, 0.0L)), bn(k) {}

  void row(const std::vector<Column>& b, std::size_t i) {
    bstar[i] = b[i];
    for (std::size_t j = 0; j < i; ++j) {
      mu[i][j] = ldot(bstar[i], bstar[j]) / bn[j];
      for (std::size_t r = 0; r < bstar[i].size(); ++r) bstar[i][r] -= mu[i][j] * bstar[j][r];
    }
    bn[i] = ldot(bstar[i], bstar[i]);
  }
  void all(const std::vector<Column>& b) {
    for (std::size_t i = 0; i < b.size(); ++i) row(b, i);
  }

  std::vector<Column> bstar;
  std::vector<Column> mu;
  Column bn;
};

void check_rank(const std::vector<Column>& b) {
  GramSchmidt gs(b.size());
  gs.all(b);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const long double len = ldot(b[i], b[i]);
    if (!(len > 0.0L) || !(gs.bn[i] > 1e-20L * len)) {
      std::ostringstream msg;
      msg << "lattice basis is rank deficient at column " << i;
      throw DomainError(msg.str());
    }
  }
}

void lll_core(std::vector<Column>& b, IntegerMatrix& u, double delta_lovasz) {
  const std::size_t n = b.size();
  if (n < 2) return;
  GramSchmidt gs(n);
  gs.row(b, 0);
  const std::size_t cap = 200000 + 2000 * n * n;
  std::size_t iterations = 0;
  std::size_t k = 1;
  while (k < n) {
    if (++iterations > cap) throw NumericError("lll_reduce: iteration cap exceeded");
    gs.row(b, k);
    for (int pass = 0; pass < 8; ++pass) {
      bool changed = false;
      for (std::size_t jj = k; jj-- > 0;) {
        const long double m = gs.mu[k][jj];
        if (!(std::fabs(m) > 0.5L)) continue;
        const long double q = std::nearbyint(m);
        const BigInt qb = to_bigint(q);
        for (std::size_t r = 0; r < n; ++r) {
          b[k][r] -= q * b[jj][r];
          if (u(r, jj) != 0) u(r, k) -= qb * u(r, jj);
        }
        for (std::size_t l = 0; l < jj; ++l) gs.mu[k][l] -= q * gs.mu[jj][l];
        gs.mu[k][jj] -= q;
        changed = true;
      }
      if (!changed) break;
      gs.row(b, k);
    }
    const long double m = gs.mu[k][k - 1];
    if (gs.bn[k] >= (delta_lovasz - m * m) * gs.bn[k - 1]) {
      ++k;
      continue;
    }
    std::swap(b[k], b[k - 1]);
    for (std::size_t r = 0; r < n; ++r) std::swap(u(r, k), u(r, k - 1));
    if (k == 1) gs.row(b, 0);
    k = std::max<std::size_t>(k - 1, 1);
  }
}

Matrix to_matrix(const std::vector<Column>& cols) {
  const std::size_t k = cols.size();
  Matrix m(k, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < k; ++i) m(i, j) = static_cast<double>(cols[j][i]);
  return m;
}

}  // namespace

LatticeBasis::LatticeBasis(Matrix columns) : b_(std::move(columns)) {
  if (b_.rows() == 0 || b_.rows() != b_.cols()) throw DomainError("LatticeBasis: basis must be square and nonempty");
  for (double v : b_.data())
    if (!std::isfinite(v)) throw DomainError("LatticeBasis: non-finite entry");
  check_rank(columns_of(b_));
}

std::vector<double> LatticeBasis::column(std::size_t j) const {
  std::vector<double> c(dim());
  for (std::size_t i = 0; i < dim(); ++i) c[i] = b_(i, j);
  return c;
}

LllCheck check_lll(const LatticeBasis& b, const IntegerMatrix& u, double delta_lovasz) {
  LllCheck out;
  out.unimodular = abs(linalg::determinant(u)) == 1;
  const auto cols = product_columns(b.matrix(), u);
  GramSchmidt gs(cols.size());
  gs.all(cols);
  out.worst_lovasz = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      out.max_mu = std::max(out.max_mu, static_cast<double>(std::fabs(gs.mu[i][j])));
    if (i > 0) {
      const long double m = gs.mu[i][i - 1];
      const long double rhs = (delta_lovasz - m * m) * gs.bn[i - 1];
      out.worst_lovasz = std::min(out.worst_lovasz, static_cast<double>(gs.bn[i] / rhs));
    }
  }
  out.size_reduced = out.max_mu <= 0.5 + 1e-9;
  out.lovasz = out.worst_lovasz >= 1.0 - 1e-9;
  return out;
}

LllResult lll_reduce(const LatticeBasis& b, double delta_lovasz) {
  if (!(delta_lovasz > 0.25 && delta_lovasz <= 1.0))
    throw DomainError("lll_reduce: delta_lovasz must lie in (1/4, 1]");
  const std::size_t n = b.dim();
  IntegerMatrix u = IntegerMatrix::identity(n);
  auto cols = columns_of(b.matrix());
  for (int attempt = 0; attempt < 2; ++attempt) {
    lll_core(cols, u, delta_lovasz);
    const auto check = check_lll(b, u, delta_lovasz);
    if (check.ok()) return {LatticeBasis(to_matrix(product_columns(b.matrix(), u))), std::move(u)};
    // Restart from the exact product to shed accumulated rounding.
    cols = product_columns(b.matrix(), u);
  }
  throw NumericError("lll_reduce: reduced basis failed the post-hoc check twice");
}

IFDecoder::IFDecoder(IntegerMatrix a, double delta, double max_variance)
    : a_(std::move(a)), delta_(delta), max_variance_(max_variance) {
  if (!(delta > 0.0)) throw DomainError("IFDecoder: delta must be > 0");
  a_inv_ = linalg::unimodular_inverse(a_);
  a_d_ = a_.to_double();
  a_inv_d_ = a_inv_.to_double();
  const double inv_max = a_inv_.max_abs().convert_to<double>();
  inv_bound_ = inv_max * static_cast<double>(dim());
  if (auto v = a_inv_.to_int64(); v && inv_max < 0x1p31) {
    a_inv_i_ = std::move(*v);
    small_inverse_ = true;
  }
}

IFDecoder IFDecoder::with_delta(double delta) const {
  IFDecoder d = *this;
  if (!(delta > 0.0)) throw DomainError("IFDecoder: delta must be > 0");
  d.delta_ = delta;
  return d;
}

void IFDecoder::decode_into(std::span<const double> y, std::span<double> out) const {
  const std::size_t k = dim();
  std::vector<double> m(k);
  double m_max = 0.0;
  for (std::size_t l = 0; l < k; ++l) {
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += a_d_[l * k + j] * y[j];
    m[l] = std::nearbyint((z - model::modulo_reduce(z, delta_)) / delta_);
    m_max = std::max(m_max, std::fabs(m[l]));
  }
  if (small_inverse_ && m_max * inv_bound_ < 0x1p52) {
    for (std::size_t i = 0; i < k; ++i) {
      std::int64_t t = 0;
      for (std::size_t j = 0; j < k; ++j) t += a_inv_i_[i * k + j] * static_cast<std::int64_t>(m[j]);
      out[i] = y[i] - delta_ * static_cast<double>(t);
    }
    return;
  }
  std::vector<BigInt> mb(k);
  for (std::size_t j = 0; j < k; ++j) mb[j] = to_bigint(m[j]);
  for (std::size_t i = 0; i < k; ++i) {
    BigInt t = 0;
    for (std::size_t j = 0; j < k; ++j) t += a_inv_(i, j) * mb[j];
    out[i] = y[i] - delta_ * t.convert_to<double>();
  }
}

double if_max_variance(const IntegerMatrix& a, const SymMatrix& sigma) {
  const std::size_t k = a.dim();
  const auto ad = a.to_double();
  double worst = 0.0;
  for (std::size_t l = 0; l < k; ++l)
    worst = std::max(worst, sigma.quadratic_form(std::span<const double>(ad).subspan(l * k, k)));
  return worst;
}

IFDecoder integer_forcing_matrix(const SymMatrix& sigma, double delta) {
  const Matrix l = linalg::cholesky(sigma);
  const auto reduced = lll_reduce(LatticeBasis(l.transpose()));
  IntegerMatrix a = reduced.u.transpose();
  const double variance = if_max_variance(a, sigma);
  return IFDecoder(std::move(a), delta, variance);
}

ExhaustiveIF exhaustive_integer_forcing(const SymMatrix& sigma, int entry_bound) {
  const std::size_t k = sigma.dim();
  if (k < 1 || k > 3) throw DomainError("exhaustive_integer_forcing: k must be 1, 2 or 3");
  if (entry_bound < 1) throw DomainError("exhaustive_integer_forcing: entry_bound must be >= 1");

  struct Candidate {
    std::vector<std::int64_t> a;
    double variance;
  };
  std::vector<Candidate> cands;
  std::vector<std::int64_t> t(k, -entry_bound);
  for (;;) {
    auto first = std::find_if(t.begin(), t.end(), [](std::int64_t v) { return v != 0; });
    if (first != t.end() && *first > 0) {
      std::vector<double> td(t.begin(), t.end());
      cands.push_back({t, sigma.quadratic_form(td)});
    }
    std::size_t pos = k;
    while (pos > 0 && t[pos - 1] == entry_bound) t[--pos] = -entry_bound;
    if (pos == 0) break;
    ++t[pos - 1];
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& x, const Candidate& y) { return x.variance < y.variance; });

  auto det = [&](const std::vector<const Candidate*>& rows) -> std::int64_t {
    auto e = [&](std::size_t i, std::size_t j) { return rows[i]->a[j]; };
    if (k == 1) return e(0, 0);
    if (k == 2) return e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0);
    return e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)) +
           e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
  };
  auto result = [&](const std::vector<const Candidate*>& rows) {
    std::vector<std::int64_t> flat;
    for (const auto* r : rows) flat.insert(flat.end(), r->a.begin(), r->a.end());
    return ExhaustiveIF{IntegerMatrix(k, flat), rows.back()->variance};
  };

  for (std::size_t i = 0; i < cands.size(); ++i) {
    const Candidate* v = &cands[i];
    if (k == 1) {
      if (std::llabs(det({v})) == 1) return result({v});
      continue;
    }
    for (std::size_t p = 0; p < i; ++p) {
      if (k == 2) {
        if (std::llabs(det({&cands[p], v})) == 1) return result({&cands[p], v});
        continue;
      }
      for (std::size_t q = p + 1; q < i; ++q)
        if (std::llabs(det({&cands[p], &cands[q], v})) == 1) return result({&cands[p], &cands[q], v});
    }
  }
  throw NumericError("exhaustive_integer_forcing: no unimodular matrix within the entry bound");
}

int default_coeff_bound(const SymMatrix& sigma, double delta) {
  if (!(delta > 0.0)) throw DomainError("default_coeff_bound: delta must be > 0");
  const double radius = estimator::default_radius(sigma.dim());
  const double lambda1 = linalg::sym_eig(sigma).eigenvalues.front();
  return static_cast<int>(std::ceil((radius + 6.0 * std::sqrt(lambda1)) / delta)) + 1;
}

MapDecoder::MapDecoder(const SymMatrix& sigma, double delta, int coeff_bound)
    : k_(sigma.dim()), delta_(delta), bound_(coeff_bound) {
  if (k_ < 1 || k_ > 4) throw DomainError("MapDecoder: brute force supports 1 <= k <= 4");
  if (!(delta > 0.0)) throw DomainError("MapDecoder: delta must be > 0");
  if (coeff_bound < 1) throw DomainError("MapDecoder: coeff_bound must be >= 1");
  const auto p = linalg::spd_inverse(sigma);
  const auto d = p.matrix().data();
  precision_.assign(d.begin(), d.end());
}

void MapDecoder::decode_into(std::span<const double> y, std::span<double> out) const {
  const std::size_t k = k_;
  std::vector<int> t(k, -bound_);
  std::vector<int> best(k, 0);
  std::vector<double> x(k);
  double best_q = std::numeric_limits<double>::infinity();
  for (;;) {
    for (std::size_t i = 0; i < k; ++i) x[i] = y[i] + delta_ * t[i];
    double q = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < k; ++j) row += precision_[i * k + j] * x[j];
      q += x[i] * row;
    }
    if (q < best_q) {
      best_q = q;
      best = t;
    }
    std::size_t pos = k;
    while (pos > 0 && t[pos - 1] == bound_) t[--pos] = -bound_;
    if (pos == 0) break;
    ++t[pos - 1];
  }
  for (std::size_t i = 0; i < k; ++i) out[i] = y[i] + delta_ * best[i];
}

std::vector<double> map_decode_bruteforce(std::span<const double> y, const SymMatrix& sigma,
                                          double delta, int coeff_bound) {
  if (y.size() != sigma.dim()) throw DomainError("map_decode_bruteforce: dimension mismatch");
  std::vector<double> out(y.size());
  MapDecoder(sigma, delta, coeff_bound).decode_into(y, out);
  return out;
}

void TrivialDecoder::decode_into(std::span<const double> y, std::span<double> out) const {
  std::copy(y.begin(), y.end(), out.begin());
}

Matrix trivial_decode(const Matrix& y) { return y; }

Matrix if_decode(const Matrix& y, const IFDecoder& decoder) {
  if (y.cols() != decoder.dim()) throw DomainError("if_decode: dimension mismatch");
  Matrix xhat;
  kernels::parallel::decode_rows(y, decoder, xhat);
  return xhat;
}

bool in_voronoi_zero(std::span<const double> z, const Matrix& generator, int coeff_bound) {
  const std::size_t k = z.size();
  if (generator.rows() != k || generator.cols() != k) throw DomainError("in_voronoi_zero: dimension mismatch");
  double d0 = 0.0;
  for (double v : z) d0 += v * v;
  std::vector<int> t(k, -coeff_bound);
  for (;;) {
    bool zero = true;
    for (int v : t) zero = zero && v == 0;
    if (!zero) {
      double d = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        double g = 0.0;
        for (std::size_t j = 0; j < k; ++j) g += generator(i, j) * t[j];
        d += (z[i] - g) * (z[i] - g);
      }
      if (d < d0) return false;
    }
    std::size_t pos = k;
    while (pos > 0 && t[pos - 1] == coeff_bound) t[--pos] = -coeff_bound;
    if (pos == 0) break;
    ++t[pos - 1];
  }
  return true;
}

DecodeReport evaluate_unwrapping(const Matrix& x, const Matrix& xhat, double delta, std::string decoder_name) {
  if (x.rows() != xhat.rows() || x.cols() != xhat.cols()) throw DomainError("evaluate_unwrapping: shape mismatch");
  DecodeReport r;
  r.decoder_name = std::move(decoder_name);
  r.n = x.rows();
  r.n_errors = kernels::parallel::count_row_mismatches(x, xhat, 1e-6 * delta);
  r.p_e_hat = r.n == 0 ? 0.0 : static_cast<double>(r.n_errors) / static_cast<double>(r.n);
  return r;
}

}  // namespace modspike::lattice
