#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "modspike/config.hpp"

namespace modspike::experiments {

struct Fig3aRow {
  std::size_t k = 0;
  double alpha = 0.0;
  double nu = 0.0;
  double delta = 0.0;
  double mean_error = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;  ///< successful trials
  std::size_t failed = 0;
  double bound = 0.0;  ///< error-bound overlay; NaN when nu < 1
};

/// Defaults: k = 50, n = k^2, delta = 16 sqrt(log k), trials = 200, alpha grid
/// 0:5.6:0.4 when `alpha_grid` is empty. One row per alpha, in grid order.
std::vector<Fig3aRow> run_figure3a(const config::ExperimentConfig& cfg, std::vector<double> alpha_grid);

struct Fig3bRow {
  std::size_t k = 0;
  double nu = 0.0;
  double delta_exp = 0.0;
  std::string decoder;
  double p_e_hat = 0.0;
  std::size_t trials_total = 0;  ///< successful trials
  double delta = 0.0;
  std::size_t n_errors = 0;
  std::size_t samples = 0;
  std::size_t failed = 0;
};

/// Defaults: k = 30, n = k^2, nu = k^3, trials = 50, delta-exp grid 0:9:0.25.
/// Each trial draws one direction and one batch, shared by every delta so
/// the curves use common random numbers. Rows sorted by (decoder, delta_exp).
std::vector<Fig3bRow> run_figure3b(const config::ExperimentConfig& cfg, std::vector<double> delta_exp_grid);

void write_figure3a_csv(std::ostream& os, const std::vector<Fig3aRow>& rows);
void write_figure3b_csv(std::ostream& os, const std::vector<Fig3bRow>& rows);

/// Smallest delta_exp at which `decoder` reaches p_e_hat <= target (NaN if never).
double threshold_delta_exp(const std::vector<Fig3bRow>& rows, std::string_view decoder, double target);

struct VerificationReport {
  std::string lemma_id;
  double statistic = 0.0;
  double reference = 0.0;
  double standard_error = 0.0;
  bool pass = false;
  std::size_t trials = 0;
  std::string detail;  ///< human-readable summary, not part of the CSV
};

const std::vector<std::string>& lemma_ids();

/// Runs one Monte-Carlo check. Throws UsageError for an unknown id.
VerificationReport verify(std::string_view lemma_id, const config::ExperimentConfig& cfg);

void write_verification_csv(std::ostream& os, const VerificationReport& report);

/// Stream id for (experiment tag, cell, trial).
std::uint64_t cell_stream(std::uint64_t tag, double cell, std::uint64_t trial);

}  // namespace modspike::experiments
