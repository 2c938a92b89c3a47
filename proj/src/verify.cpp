#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "modspike/ball_sampler.hpp"
#include "modspike/csv.hpp"
#include "modspike/error.hpp"
#include "modspike/estimator.hpp"
#include "modspike/experiments.hpp"
#include "modspike/kernels.hpp"
#include "modspike/lattice.hpp"
#include "modspike/model.hpp"
#include "modspike/stats.hpp"

namespace modspike::experiments {

namespace {

using config::ExperimentConfig;
using linalg::Matrix;

constexpr std::uint64_t kVerifyTag = 0x7e41f1;

rngstat::RngStream lemma_rng(const ExperimentConfig& cfg, std::uint64_t lemma) {
  return rngstat::RngStream(config::resolve_seed(cfg), rngstat::derive_stream_id(kVerifyTag, lemma));
}

double nu_or(const ExperimentConfig& cfg, std::size_t k, double fallback) {
  if (cfg.nu || !cfg.alpha.empty()) return config::resolve_nu(cfg, k, 0.0);
  return fallback;
}

std::vector<double> direction(const ExperimentConfig& cfg, std::size_t k) {
  if (cfg.u_path.empty()) return std::vector<double>(k, 1.0 / std::sqrt(static_cast<double>(k)));
  std::ifstream in(cfg.u_path);
  if (!in) throw UsageError("cannot open u file '" + cfg.u_path + "'");
  auto u = csv::read_vector(in);
  if (u.size() != k) throw UsageError("u file has " + std::to_string(u.size()) + " coords, expected k = " + std::to_string(k));
  const double norm = linalg::norm2(u);
  if (!(norm > 0.0)) throw UsageError("u must be nonzero");
  for (double& v : u) v /= norm;
  return u;
}

std::string fmt(double v) { return csv::format_double(v); }

VerificationReport verify_prop1(const ExperimentConfig& cfg) {
  const std::size_t k = config::resolve_k(cfg, 5);
  const double nu = nu_or(cfg, k, 10.0);
  const double radius = config::resolve_radius(cfg, k);
  const std::size_t draws = config::resolve_trials(cfg, 1000000);
  auto rng = lemma_rng(cfg, 1);
  const auto m = model::SpikedModel::random_direction(k, nu, rng);
  const auto eig = linalg::sym_eig(m.covariance());
  const auto mc = estimator::ball_moment_mc(m, radius, eig.eigenvectors.transpose(), draws, rng);

  VerificationReport r;
  r.lemma_id = "prop1";
  r.trials = draws;
  r.pass = true;
  double worst_z = -1.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double v = mc.mean(i, j);
      const double se = mc.standard_error(i, j);
      const double z = se > 0.0 ? std::fabs(v) / se : (v == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
      if (z > 3.0) r.pass = false;
      if (z > worst_z) {
        worst_z = z;
        r.statistic = v;
        r.standard_error = se;
      }
    }
  bool ordered = true;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (eig.eigenvalues[i] > eig.eigenvalues[j] + 1e-9 && !(mc.mean(i, i) > mc.mean(j, j))) ordered = false;
  r.pass = r.pass && ordered;
  r.reference = 0.0;
  r.detail = "max |off-diagonal|/SE = " + fmt(std::max(worst_z, 0.0)) + ", ordering " + (ordered ? "preserved" : "violated") +
             ", top truncated eigenvalue " + fmt(mc.mean(0, 0));
  return r;
}

VerificationReport verify_pball(const ExperimentConfig& cfg) {
  const std::size_t k = config::resolve_k(cfg, 10);
  const double nu = nu_or(cfg, k, 0.0);
  const double radius = config::resolve_radius(cfg, k);
  const std::size_t draws = config::resolve_trials(cfg, 1000000);
  auto rng = lemma_rng(cfg, 2);
  const auto q = estimator::p_ball(nu, k, radius);
  const auto mc = estimator::p_ball_monte_carlo(nu, k, radius, draws, rng);
  const double sigma = std::sqrt(q.value * q.complement / static_cast<double>(draws));
  const bool bracket = q.value >= q.lower_bound - 1e-6 && q.value <= q.upper_bound + 1e-6;
  const bool agree = std::fabs(q.value - mc.value) <= 3.0 * sigma;
  bool closed_form = true;
  std::string extra;
  if (nu == 0.0) {
    const double chi2 = rngstat::chi2_cdf(radius * radius, static_cast<double>(k));
    closed_form = std::fabs(q.value - chi2) <= 1e-6;
    extra = ", chi-square cdf " + fmt(chi2);
  }
  VerificationReport r;
  r.lemma_id = "pball";
  r.statistic = q.value;
  r.reference = mc.value;
  r.standard_error = sigma;
  r.trials = draws;
  r.pass = bracket && agree && closed_form;
  r.detail = "quadrature " + fmt(q.value) + " in [" + fmt(q.lower_bound) + ", " + fmt(q.upper_bound) + "]: " +
             (bracket ? "yes" : "no") + ", Monte Carlo " + fmt(mc.value) + extra;
  return r;
}

VerificationReport verify_convex(const ExperimentConfig& cfg) {
  const std::size_t k = config::resolve_k(cfg, 5);
  const double nu = nu_or(cfg, k, 10.0);
  const double radius = config::resolve_radius(cfg, k);
  const std::size_t draws = config::resolve_trials(cfg, 1000000);
  constexpr std::size_t kDirections = 50;
  auto rng = lemma_rng(cfg, 3);
  const auto m = model::SpikedModel::random_direction(k, nu, rng);
  const auto sigma = m.covariance();
  Matrix v(kDirections, k);
  for (std::size_t d = 0; d < kDirections; ++d) {
    const auto dir = rngstat::uniform_sphere(k, rng);
    std::copy(dir.begin(), dir.end(), v.row(d).begin());
  }
  const auto mc = estimator::ball_moment_mc(m, radius, v, draws, rng, true);
  VerificationReport r;
  r.lemma_id = "convex";
  r.trials = draws;
  r.pass = true;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t d = 0; d < kDirections; ++d) {
    const double ref = sigma.quadratic_form(v.row(d));
    const double se = mc.standard_error(d, d);
    const double z = (mc.mean(d, d) - ref) / se;
    if (mc.mean(d, d) > ref + 3.0 * se) r.pass = false;
    if (z > worst) {
      worst = z;
      r.statistic = mc.mean(d, d);
      r.reference = ref;
      r.standard_error = se;
    }
  }
  r.detail = "E[(v'X)^2 | ball] <= v' Sigma v over " + std::to_string(kDirections) +
             " directions; largest excess/SE = " + fmt(worst);
  return r;
}

VerificationReport verify_gap(const ExperimentConfig& cfg) {
  const std::size_t k = config::resolve_k(cfg, 10);
  const double radius = config::resolve_radius(cfg, k);
  const std::size_t draws = config::resolve_trials(cfg, 200000);
  const double kd = static_cast<double>(k);
  std::vector<double> nus = {1.0, kd, 10.0 * kd};
  if (cfg.nu || !cfg.alpha.empty()) nus = {config::resolve_nu(cfg, k, 0.0)};
  auto rng = lemma_rng(cfg, 4);

  VerificationReport r;
  r.lemma_id = "gap";
  r.trials = draws;
  r.pass = true;
  r.statistic = std::numeric_limits<double>::infinity();
  std::vector<double> gaps, ses;
  std::ostringstream detail;
  for (double nu : nus) {
    std::vector<double> lambdas(k, 1.0);
    lambdas[0] = 1.0 + nu;
    auto sub = rng.substream(gaps.size());
    const auto te = estimator::truncated_eigenvalues(lambdas, radius, draws, sub);
    std::size_t second = 1;
    for (std::size_t i = 2; i < k; ++i)
      if (te.mu[i] > te.mu[second]) second = i;
    const double gap = k > 1 ? te.mu[0] - te.mu[second] : te.mu[0];
    const double se = k > 1 ? std::hypot(te.standard_error[0], te.standard_error[second]) : te.standard_error[0];
    if (!(gap > 3.0 * se)) r.pass = false;
    if (gap < r.statistic) {
      r.statistic = gap;
      r.standard_error = se;
    }
    detail << "nu=" << fmt(nu) << " gap=" << fmt(gap) << " se=" << fmt(se) << "; ";
    gaps.push_back(gap);
    ses.push_back(se);
  }
  for (std::size_t i = 1; i < gaps.size(); ++i)
    if (gaps[i] < gaps[i - 1] - 3.0 * std::hypot(ses[i], ses[i - 1])) r.pass = false;
  r.reference = 0.0;
  r.detail = detail.str() + "nondecreasing in nu within 3 SE";
  return r;
}

VerificationReport verify_badprob(const ExperimentConfig& cfg) {
  const std::size_t k = config::resolve_k(cfg, 50);
  const double nu = nu_or(cfg, k, static_cast<double>(k) * static_cast<double>(k));
  const double delta = config::resolve_delta(cfg, k);
  const double radius = config::resolve_radius(cfg, k);
  const std::size_t trials = config::resolve_trials(cfg, 100000);
  const auto base = lemma_rng(cfg, 5);
  const model::ModuloChannel channel(delta);

  std::size_t bad = 0;
#pragma omp parallel for schedule(dynamic, 256) reduction(+ : bad)
  for (std::ptrdiff_t ti = 0; ti < static_cast<std::ptrdiff_t>(trials); ++ti) {
    auto rng = base.substream(static_cast<std::uint64_t>(ti));
    const auto m = model::SpikedModel::random_direction(k, nu, rng);
    const auto x = model::sample_spiked(m, 1, rng);
    const auto y = model::apply_channel(x, channel);
    if (model::classify_batch(x, y, radius)[0].bad) ++bad;
  }
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(bad) / n;
  const double sigma = std::sqrt(std::max(p, 1.0 / n) * (1.0 - p) / n);
  VerificationReport r;
  r.lemma_id = "badprob";
  r.statistic = p;
  r.reference = 1e-3;
  r.standard_error = sigma;
  r.trials = trials;
  r.pass = p + 3.0 * sigma <= 1e-3;
  r.detail = std::to_string(bad) + " bad pairs in " + std::to_string(trials) + " (fresh direction each)";
  return r;
}

VerificationReport verify_voronoi(const ExperimentConfig& cfg) {
  const std::size_t k = config::resolve_k(cfg, 2);
  if (k > 4) throw UsageError("voronoi: k must be <= 4");
  const double nu = nu_or(cfg, k, 100.0);
  const bool delta_given = cfg.delta || !cfg.delta_exp.empty() || cfg.delta_factor;
  const double delta = delta_given ? config::resolve_delta(cfg, k) : 3.0;
  const std::size_t n = config::resolve_trials(cfg, 100000);
  const model::SpikedModel m(nu, direction(cfg, k));
  const auto sigma = m.covariance();
  const int bound = cfg.coeff_bound.value_or(lattice::default_coeff_bound(sigma, delta));
  const auto base = lemma_rng(cfg, 6);

  auto rng_map = base.substream(0);
  const auto x = model::sample_spiked(m, n, rng_map);
  const auto y = model::apply_channel(x, model::ModuloChannel(delta));
  Matrix xhat;
  kernels::parallel::decode_rows(y, lattice::MapDecoder(sigma, delta, bound), xhat);
  const std::size_t map_ok = n - kernels::parallel::count_row_mismatches(x, xhat, 1e-6 * delta);

  Matrix g = linalg::spd_power(sigma, -0.5).matrix();
  for (double& v : g.data()) v *= delta;
  const auto z_family = base.substream(1).next_u64();
  std::size_t cell_ok = 0;
#pragma omp parallel for schedule(dynamic, 256) reduction(+ : cell_ok)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    rngstat::RngStream rng(base.master_seed(), rngstat::derive_stream_id(z_family, static_cast<std::uint64_t>(i)));
    const auto z = rngstat::gaussian_vector(k, rng);
    if (lattice::in_voronoi_zero(z, g, bound)) ++cell_ok;
  }
  const double nd = static_cast<double>(n);
  const double p1 = static_cast<double>(map_ok) / nd;
  const double p2 = static_cast<double>(cell_ok) / nd;
  const double pooled = 0.5 * (p1 + p2);
  const double sigma_diff = std::sqrt(pooled * (1.0 - pooled) * 2.0 / nd);
  VerificationReport r;
  r.lemma_id = "voronoi";
  r.statistic = p1;
  r.reference = p2;
  r.standard_error = sigma_diff;
  r.trials = n;
  r.pass = std::fabs(p1 - p2) <= 3.0 * sigma_diff;
  r.detail = "MAP success " + fmt(p1) + " vs Gaussian measure of the Voronoi cell " + fmt(p2) +
             " (coefficient bound " + std::to_string(bound) + ")";
  return r;
}

VerificationReport verify_nball(const ExperimentConfig& cfg) {
  const std::size_t k = config::resolve_k(cfg, 20);
  const double nu = nu_or(cfg, k, static_cast<double>(k));
  const std::size_t n = config::resolve_n(cfg, k);
  const double delta = config::resolve_delta(cfg, k);
  const double radius = config::resolve_radius(cfg, k);
  const std::size_t trials = config::resolve_trials(cfg, 200);
  if (trials < 2) throw UsageError("nball: trials must be >= 2");
  const auto base = lemma_rng(cfg, 7);
  const model::ModuloChannel channel(delta);

  std::vector<double> counts(trials);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ti = 0; ti < static_cast<std::ptrdiff_t>(trials); ++ti) {
    auto rng = base.substream(static_cast<std::uint64_t>(ti));
    const auto m = model::SpikedModel::random_direction(k, nu, rng);
    const auto x = model::sample_spiked(m, n, rng);
    const auto y = model::apply_channel(x, channel);
    counts[static_cast<std::size_t>(ti)] = static_cast<double>(kernels::serial::ball_second_moment(y, radius).selected);
  }
  double mean = 0.0;
  for (double c : counts) mean += c;
  mean /= static_cast<double>(trials);
  double ss = 0.0;
  for (double c : counts) ss += (c - mean) * (c - mean);
  const double se = std::sqrt(ss / static_cast<double>(trials - 1) / static_cast<double>(trials));
  const double ref = static_cast<double>(n) * estimator::p_ball(nu, k, radius).value;
  VerificationReport r;
  r.lemma_id = "nball";
  r.statistic = mean;
  r.reference = ref;
  r.standard_error = se;
  r.trials = trials;
  r.pass = std::fabs(mean - ref) <= 3.0 * se;
  r.detail = "mean |K_ball| " + fmt(mean) + " vs n p_ball " + fmt(ref);
  return r;
}

}  // namespace

const std::vector<std::string>& lemma_ids() {
  static const std::vector<std::string> ids = {"prop1", "pball", "convex", "gap", "badprob", "voronoi", "nball"};
  return ids;
}

VerificationReport verify(std::string_view lemma_id, const ExperimentConfig& cfg) {
  if (lemma_id == "prop1") return verify_prop1(cfg);
  if (lemma_id == "pball") return verify_pball(cfg);
  if (lemma_id == "convex") return verify_convex(cfg);
  if (lemma_id == "gap") return verify_gap(cfg);
  if (lemma_id == "badprob") return verify_badprob(cfg);
  if (lemma_id == "voronoi") return verify_voronoi(cfg);
  if (lemma_id == "nball") return verify_nball(cfg);
  throw UsageError("unknown lemma id '" + std::string(lemma_id) + "'");
}

}  // namespace modspike::experiments
