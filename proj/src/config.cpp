#include "modspike/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "modspike/csv.hpp"
#include "modspike/error.hpp"
#include "modspike/estimator.hpp"

namespace modspike::config {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t positive_count(const std::string& key, const std::string& v) {
  const long long x = csv::parse_integer(v);
  if (x < 1) throw UsageError(key + " must be >= 1, got " + v);
  return static_cast<std::size_t>(x);
}

double positive_real(const std::string& key, const std::string& v) {
  const double x = csv::parse_double(v);
  if (!(x > 0.0) || !std::isfinite(x)) throw UsageError(key + " must be a positive number, got " + v);
  return x;
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "k",     "n",     "nu",     "alpha", "delta", "delta-exp", "delta-factor", "trials",
      "seed",  "radius", "coeff-bound", "out", "u", "x", "y", "flags"};
  return keys;
}

Settings parse_config(std::istream& is) {
  Settings s;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw UsageError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (value.empty()) throw UsageError("config line " + std::to_string(lineno) + ": empty value for '" + key + "'");
    if (!s.emplace(key, value).second)
      throw UsageError("config line " + std::to_string(lineno) + ": repeated key '" + key + "'");
  }
  return s;
}

Settings load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::vector<double> parse_grid(std::string_view text) {
  const std::string t = trim(text);
  if (t.empty()) throw UsageError("empty grid");
  std::vector<double> out;
  if (t.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(t);
    std::string piece;
    while (std::getline(ss, piece, ':')) parts.push_back(csv::parse_double(trim(piece)));
    if (parts.size() != 3) throw UsageError("grid '" + t + "': expected start:stop:step");
    const double start = parts[0], stop = parts[1], step = parts[2];
    if (!(step > 0.0) || !(stop >= start)) throw UsageError("grid '" + t + "': need step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 100000) throw UsageError("grid '" + t + "' has too many points");
    for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::stringstream ss(t);
  std::string piece;
  while (std::getline(ss, piece, ',')) out.push_back(csv::parse_double(trim(piece)));
  return out;
}

ExperimentConfig build_config(const Settings& settings) {
  ExperimentConfig c;
  const auto& keys = known_keys();
  for (const auto& [key, v] : settings) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw UsageError("unknown setting '" + key + "'");
    if (key == "k") {
      c.k = positive_count(key, v);
    } else if (key == "n") {
      c.n = positive_count(key, v);
    } else if (key == "trials") {
      c.trials = positive_count(key, v);
    } else if (key == "nu") {
      const double nu = csv::parse_double(v);
      if (!(nu >= 0.0) || !std::isfinite(nu)) throw UsageError("nu must be >= 0, got " + v);
      c.nu = nu;
    } else if (key == "alpha") {
      c.alpha = parse_grid(v);
    } else if (key == "delta") {
      c.delta = positive_real(key, v);
    } else if (key == "delta-exp") {
      c.delta_exp = parse_grid(v);
    } else if (key == "delta-factor") {
      c.delta_factor = positive_real(key, v);
    } else if (key == "seed") {
      const long long s = csv::parse_integer(v);
      if (s < 0) throw UsageError("seed must be >= 0, got " + v);
      c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "radius") {
      c.radius = positive_real(key, v);
    } else if (key == "coeff-bound") {
      c.coeff_bound = static_cast<int>(positive_count(key, v));
    } else if (key == "out") {
      c.out = v;
    } else if (key == "u") {
      c.u_path = v;
    } else if (key == "x") {
      c.x_path = v;
    } else if (key == "y") {
      c.y_path = v;
    } else if (key == "flags") {
      c.flags_path = v;
    }
  }
  return c;
}

std::size_t resolve_k(const ExperimentConfig& c, std::size_t fallback) { return c.k.value_or(fallback); }

std::size_t resolve_n(const ExperimentConfig& c, std::size_t k) { return c.n.value_or(k * k); }

std::size_t resolve_trials(const ExperimentConfig& c, std::size_t fallback) { return c.trials.value_or(fallback); }

std::uint64_t resolve_seed(const ExperimentConfig& c) { return c.seed.value_or(kDefaultSeed); }

double resolve_nu(const ExperimentConfig& c, std::size_t k, double fallback_alpha) {
  if (c.nu) return *c.nu;
  if (c.alpha.size() > 1) throw UsageError("alpha: a single value is expected here");
  const double a = c.alpha.empty() ? fallback_alpha : c.alpha.front();
  return std::pow(static_cast<double>(k), a);
}

double resolve_delta(const ExperimentConfig& c, std::size_t k) {
  if (c.delta) return *c.delta;
  const double s = std::sqrt(std::log(static_cast<double>(k)));
  if (!(s > 0.0)) throw UsageError("delta: the sqrt(log k) rules need k >= 2; pass --delta");
  if (!c.delta_exp.empty()) {
    if (c.delta_exp.size() > 1) throw UsageError("delta-exp: a single value is expected here");
    return std::exp2(c.delta_exp.front()) * s;
  }
  return c.delta_factor.value_or(kDefaultDeltaFactor) * s;
}

double resolve_radius(const ExperimentConfig& c, std::size_t k) {
  return c.radius ? *c.radius : estimator::default_radius(k);
}

}  // namespace modspike::config
