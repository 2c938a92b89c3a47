#include "modspike/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>

#include "modspike/csv.hpp"
#include "modspike/error.hpp"
#include "modspike/estimator.hpp"
#include "modspike/kernels.hpp"
#include "modspike/lattice.hpp"
#include "modspike/model.hpp"

namespace modspike::experiments {

namespace {

constexpr std::uint64_t kFig3aTag = 0x3a;
constexpr std::uint64_t kFig3bTag = 0x3b;

// Neumaier summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
      c_ += (sum_ - t) + v;
    } else {
      c_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

std::vector<double> default_grid(double start, double stop, double step) {
  std::vector<double> g;
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) g.push_back(start + static_cast<double>(i) * step);
  return g;
}

}  // namespace

std::uint64_t cell_stream(std::uint64_t tag, double cell, std::uint64_t trial) {
  return rngstat::derive_stream_id(rngstat::derive_stream_id(tag, std::bit_cast<std::uint64_t>(cell)), trial);
}

std::vector<Fig3aRow> run_figure3a(const config::ExperimentConfig& cfg, std::vector<double> alpha_grid) {
  const std::size_t k = config::resolve_k(cfg, 50);
  if (k < 2) throw DomainError("fig3a: k must be >= 2");
  const std::size_t n = config::resolve_n(cfg, k);
  const std::size_t trials = config::resolve_trials(cfg, 200);
  const std::uint64_t seed = config::resolve_seed(cfg);
  const double delta = config::resolve_delta(cfg, k);
  const double radius = config::resolve_radius(cfg, k);
  if (alpha_grid.empty()) alpha_grid = default_grid(0.0, 5.6, 0.4);

  std::vector<Fig3aRow> rows;
  for (double alpha : alpha_grid) {
    const double nu = std::pow(static_cast<double>(k), alpha);
    std::vector<double> err(trials, 0.0);
    std::vector<char> ok(trials, 0);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t ti = 0; ti < static_cast<std::ptrdiff_t>(trials); ++ti) {
      const auto t = static_cast<std::uint64_t>(ti);
      rngstat::RngStream rng(seed, cell_stream(kFig3aTag, alpha, t));
      const auto m = model::SpikedModel::random_direction(k, nu, rng);
      const auto x = model::sample_spiked(m, n, rng);
      const auto y = model::apply_channel(x, model::ModuloChannel(delta));
      try {
        const auto est = estimator::estimate_spike(y, radius);
        err[t] = estimator::estimation_error(m.u(), est.u_hat);
        ok[t] = 1;
      } catch (const EstimationError&) {
      }
    }
    Fig3aRow row;
    row.k = k;
    row.alpha = alpha;
    row.nu = nu;
    row.delta = delta;
    CompensatedSum s, s2;
    for (std::size_t t = 0; t < trials; ++t) {
      if (!ok[t]) {
        ++row.failed;
        continue;
      }
      ++row.trials;
      s.add(err[t]);
    }
    if (row.trials > 0) {
      row.mean_error = s.value() / static_cast<double>(row.trials);
      for (std::size_t t = 0; t < trials; ++t)
        if (ok[t]) s2.add((err[t] - row.mean_error) * (err[t] - row.mean_error));
      row.standard_error = row.trials > 1
                               ? std::sqrt(s2.value() / static_cast<double>(row.trials - 1) /
                                           static_cast<double>(row.trials))
                               : std::numeric_limits<double>::quiet_NaN();
    } else {
      row.mean_error = std::numeric_limits<double>::quiet_NaN();
      row.standard_error = std::numeric_limits<double>::quiet_NaN();
    }
    row.bound = nu >= 1.0 ? estimator::theorem1_bound(k, static_cast<double>(n), nu)
                          : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  }
  return rows;
}

std::vector<Fig3bRow> run_figure3b(const config::ExperimentConfig& cfg, std::vector<double> delta_exp_grid) {
  const std::size_t k = config::resolve_k(cfg, 30);
  if (k < 2) throw DomainError("fig3b: k must be >= 2");
  const std::size_t n = config::resolve_n(cfg, k);
  const std::size_t trials = config::resolve_trials(cfg, 50);
  const std::uint64_t seed = config::resolve_seed(cfg);
  const double nu = config::resolve_nu(cfg, k, 3.0);
  const double radius = config::resolve_radius(cfg, k);
  if (delta_exp_grid.empty()) delta_exp_grid = default_grid(0.0, 9.0, 0.25);
  const double root_log_k = std::sqrt(std::log(static_cast<double>(k)));
  const std::size_t cells = delta_exp_grid.size();

  // Per trial and cell: errors for {blind, informed, trivial}, and blind failure.
  enum { kBlind = 0, kInformed = 1, kTrivial = 2 };
  std::vector<std::size_t> errors(trials * cells * 3, 0);
  std::vector<char> blind_failed(trials * cells, 0);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ti = 0; ti < static_cast<std::ptrdiff_t>(trials); ++ti) {
    const auto t = static_cast<std::uint64_t>(ti);
    rngstat::RngStream rng(seed, rngstat::derive_stream_id(kFig3bTag, t));
    const auto m = model::SpikedModel::random_direction(k, nu, rng);
    const auto x = model::sample_spiked(m, n, rng);
    const auto informed = lattice::integer_forcing_matrix(m.covariance(), 1.0);
    linalg::Matrix y, xhat;
    for (std::size_t c = 0; c < cells; ++c) {
      const double delta = std::exp2(delta_exp_grid[c]) * root_log_k;
      const double tol = 1e-6 * delta;
      kernels::serial::fold(x, delta, y);
      const std::size_t base = (t * cells + c) * 3;
      errors[base + kTrivial] = kernels::serial::count_row_mismatches(x, y, tol);
      kernels::serial::decode_rows(y, informed.with_delta(delta), xhat);
      errors[base + kInformed] = kernels::serial::count_row_mismatches(x, xhat, tol);
      try {
        const auto est = estimator::estimate_spike(y, radius);
        const auto blind = lattice::integer_forcing_matrix(linalg::spiked_covariance(est.u_hat, nu), delta);
        kernels::serial::decode_rows(y, blind, xhat);
        errors[base + kBlind] = kernels::serial::count_row_mismatches(x, xhat, tol);
      } catch (const EstimationError&) {
        blind_failed[t * cells + c] = 1;
      } catch (const NumericError&) {
        blind_failed[t * cells + c] = 1;
      }
    }
  }

  static const char* const names[3] = {"blind_if", "informed_if", "trivial"};
  std::vector<std::size_t> order(cells);
  for (std::size_t c = 0; c < cells; ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return delta_exp_grid[a] < delta_exp_grid[b]; });

  std::vector<Fig3bRow> rows;
  for (int d = 0; d < 3; ++d) {
    for (std::size_t c : order) {
      Fig3bRow row;
      row.k = k;
      row.nu = nu;
      row.delta_exp = delta_exp_grid[c];
      row.delta = std::exp2(row.delta_exp) * root_log_k;
      row.decoder = names[d];
      for (std::size_t t = 0; t < trials; ++t) {
        if (d == kBlind && blind_failed[t * cells + c]) {
          ++row.failed;
          continue;
        }
        ++row.trials_total;
        row.n_errors += errors[(t * cells + c) * 3 + static_cast<std::size_t>(d)];
      }
      row.samples = row.trials_total * n;
      row.p_e_hat = row.samples == 0 ? std::numeric_limits<double>::quiet_NaN()
                                     : static_cast<double>(row.n_errors) / static_cast<double>(row.samples);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_figure3a_csv(std::ostream& os, const std::vector<Fig3aRow>& rows) {
  csv::Writer w(os);
  w.header({"k", "alpha", "nu", "delta", "mean_error", "stderr", "trials", "failed", "bound"});
  for (const auto& r : rows) {
    w.field(r.k).field(r.alpha).field(r.nu).field(r.delta).field(r.mean_error).field(r.standard_error);
    w.field(r.trials).field(r.failed).field(r.bound);
    w.end_row();
  }
}

void write_figure3b_csv(std::ostream& os, const std::vector<Fig3bRow>& rows) {
  csv::Writer w(os);
  w.header({"k", "nu", "delta_exp", "decoder", "p_e_hat", "trials_total", "delta", "n_errors", "samples", "failed"});
  for (const auto& r : rows) {
    w.field(r.k).field(r.nu).field(r.delta_exp).field(r.decoder).field(r.p_e_hat).field(r.trials_total);
    w.field(r.delta).field(r.n_errors).field(r.samples).field(r.failed);
    w.end_row();
  }
}

double threshold_delta_exp(const std::vector<Fig3bRow>& rows, std::string_view decoder, double target) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : rows) {
    if (r.decoder != decoder || !(r.p_e_hat <= target)) continue;
    if (std::isnan(best) || r.delta_exp < best) best = r.delta_exp;
  }
  return best;
}

void write_verification_csv(std::ostream& os, const VerificationReport& report) {
  csv::Writer w(os);
  w.header({"lemma_id", "statistic", "reference", "standard_error", "pass", "trials"});
  w.field(report.lemma_id).field(report.statistic).field(report.reference).field(report.standard_error);
  w.field(report.pass ? 1 : 0).field(report.trials);
  w.end_row();
}

}  // namespace modspike::experiments
