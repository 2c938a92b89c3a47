#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace modspike::config {

/// Raw key/value settings, keyed by the long flag name without dashes
/// (e.g. "delta-factor").
using Settings = std::map<std::string, std::string>;

/// Every key accepted by config files and the CLI.
const std::vector<std::string>& known_keys();

/// Flat `key = value` text. '#' starts a comment; blank lines are skipped;
/// '_' in keys is read as '-'. Throws UsageError on syntax errors, unknown or
/// repeated keys.
Settings parse_config(std::istream& is);
Settings load_config_file(const std::string& path);

/// "a,b,c" or "start:stop:step" (inclusive of stop up to rounding).
std::vector<double> parse_grid(std::string_view text);

struct ExperimentConfig {
  std::optional<std::size_t> k;
  std::optional<std::size_t> n;  ///< default k^2
  std::optional<double> nu;      ///< absolute spike; wins over alpha
  std::vector<double> alpha;     ///< nu = k^alpha; a grid for fig3a
  std::optional<double> delta;   ///< absolute delta; wins over delta-exp and delta-factor
  std::vector<double> delta_exp;  ///< delta = 2^e sqrt(log k); a grid for fig3b
  std::optional<double> delta_factor;  ///< delta = f sqrt(log k)
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<double> radius;
  std::optional<int> coeff_bound;
  std::string out;
  std::string u_path;
  std::string x_path;
  std::string y_path;
  std::string flags_path;
};

/// Validates and converts settings. Throws UsageError on malformed values.
ExperimentConfig build_config(const Settings& settings);

inline constexpr std::uint64_t kDefaultSeed = 20240601;
inline constexpr double kDefaultDeltaFactor = 16.0;

std::size_t resolve_k(const ExperimentConfig& c, std::size_t fallback);
std::size_t resolve_n(const ExperimentConfig& c, std::size_t k);
std::size_t resolve_trials(const ExperimentConfig& c, std::size_t fallback);
std::uint64_t resolve_seed(const ExperimentConfig& c);
/// Absolute nu, else k^alpha for a single alpha, else k^fallback_alpha.
double resolve_nu(const ExperimentConfig& c, std::size_t k, double fallback_alpha);
/// delta, else 2^delta_exp sqrt(log k), else delta_factor sqrt(log k), else 16 sqrt(log k).
double resolve_delta(const ExperimentConfig& c, std::size_t k);
double resolve_radius(const ExperimentConfig& c, std::size_t k);

}  // namespace modspike::config
