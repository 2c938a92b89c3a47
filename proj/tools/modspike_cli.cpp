// modspike: spike estimation and unwrapping experiments from the command line.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>

#include "modspike/config.hpp"
#include "modspike/csv.hpp"
#include "modspike/error.hpp"
#include "modspike/estimator.hpp"
#include "modspike/experiments.hpp"
#include "modspike/kernels.hpp"
#include "modspike/lattice.hpp"
#include "modspike/model.hpp"

namespace {

using namespace modspike;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitVerifyFailed = 4;

const std::map<std::string, std::string>& flag_help() {
  static const std::map<std::string, std::string> help = {
      {"k", "dimension"},
      {"n", "samples per trial (default k^2)"},
      {"nu", "spike strength (overrides --alpha)"},
      {"alpha", "nu = k^alpha; grid 'a,b,c' or 'start:stop:step' for fig3a"},
      {"delta", "absolute modulo step"},
      {"delta-exp", "delta = 2^e sqrt(log k); grid for fig3b"},
      {"delta-factor", "delta = f sqrt(log k) (default 16)"},
      {"trials", "trials or Monte-Carlo draws"},
      {"seed", "master seed"},
      {"radius", "ball radius (default 2 sqrt(k) + z2(k, 0.1))"},
      {"coeff-bound", "MAP search box half-width"},
      {"out", "output CSV path (default stdout)"},
      {"u", "direction CSV (coord,value)"},
      {"x", "X samples CSV"},
      {"y", "Y samples CSV"},
      {"flags", "sample flags CSV (sample subcommand output)"},
  };
  return help;
}

struct Flags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string config_path;
};

void add_common(CLI::App* sub, Flags& f) {
  for (const auto& key : config::known_keys()) {
    f.values[key];
    f.options[key] = sub->add_option("--" + key, f.values[key], flag_help().at(key));
  }
  sub->add_option("--config", f.config_path, "key = value file; flags override it");
}

config::ExperimentConfig resolve(const Flags& f) {
  config::Settings s;
  if (!f.config_path.empty()) s = config::load_config_file(f.config_path);
  for (const auto& [key, opt] : f.options)
    if (opt->count() > 0) s[key] = f.values.at(key);
  return config::build_config(s);
}

// stdout unless --out was given.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw UsageError("cannot open output file '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void finish() {
    stream().flush();
    if (!stream()) throw UsageError("write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

linalg::Matrix read_samples(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("--") + what + " is required");
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  return model::read_samples_csv(in);
}

std::vector<double> read_direction(const std::string& path, std::size_t k) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open u file '" + path + "'");
  auto u = csv::read_vector(in);
  if (u.size() != k) throw UsageError("u has " + std::to_string(u.size()) + " coords, expected " + std::to_string(k));
  const double norm = linalg::norm2(u);
  if (!(norm > 0.0)) throw UsageError("u must be nonzero");
  for (double& v : u) v /= norm;
  return u;
}

double required_nu(const config::ExperimentConfig& c, std::size_t k) {
  if (!c.nu && c.alpha.empty()) throw UsageError("--nu or --alpha is required for this decoder");
  return config::resolve_nu(c, k, 0.0);
}

int run_fig3a(const config::ExperimentConfig& c) {
  const auto rows = experiments::run_figure3a(c, c.alpha);
  Output out(c.out);
  experiments::write_figure3a_csv(out.stream(), rows);
  out.finish();
  return kExitOk;
}

int run_fig3b(const config::ExperimentConfig& c) {
  const auto rows = experiments::run_figure3b(c, c.delta_exp);
  Output out(c.out);
  experiments::write_figure3b_csv(out.stream(), rows);
  out.finish();
  return kExitOk;
}

int run_verify(const config::ExperimentConfig& c, const std::string& lemma) {
  const auto report = experiments::verify(lemma, c);
  Output out(c.out);
  experiments::write_verification_csv(out.stream(), report);
  out.finish();
  std::cerr << lemma << ": " << (report.pass ? "PASS" : "FAIL") << " (" << report.detail << ")\n";
  return report.pass ? kExitOk : kExitVerifyFailed;
}

int run_estimate(const config::ExperimentConfig& c) {
  const auto y = read_samples(c.y_path, "y");
  const double radius = config::resolve_radius(c, y.cols());
  const auto est = estimator::estimate_spike(y, radius);
  Output out(c.out);
  csv::write_vector(out.stream(), "u_hat", est.u_hat);
  out.finish();
  std::cerr << "selected " << est.n_selected << " of " << est.n_total << " samples, radius "
            << csv::format_double(radius) << (est.rank_deficient ? " (fewer than k selected)" : "") << "\n";
  return kExitOk;
}

int run_decode(const config::ExperimentConfig& c, const std::string& name) {
  const auto x = read_samples(c.x_path, "x");
  const auto y = read_samples(c.y_path, "y");
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw UsageError("X and Y shapes differ");
  const std::size_t k = y.cols();
  const double delta = config::resolve_delta(c, k);
  linalg::Matrix xhat;
  auto sigma_from_u = [&] {
    if (c.u_path.empty()) throw UsageError("--u is required for this decoder");
    return linalg::spiked_covariance(read_direction(c.u_path, k), required_nu(c, k));
  };
  if (name == "trivial") {
    kernels::parallel::decode_rows(y, lattice::TrivialDecoder{}, xhat);
  } else if (name == "informed_if") {
    kernels::parallel::decode_rows(y, lattice::integer_forcing_matrix(sigma_from_u(), delta), xhat);
  } else if (name == "blind_if") {
    const double nu = required_nu(c, k);
    const auto est = estimator::estimate_spike(y, config::resolve_radius(c, k));
    kernels::parallel::decode_rows(y, lattice::integer_forcing_matrix(linalg::spiked_covariance(est.u_hat, nu), delta),
                                   xhat);
  } else if (name == "map") {
    const auto sigma = sigma_from_u();
    const int bound = c.coeff_bound.value_or(lattice::default_coeff_bound(sigma, delta));
    kernels::parallel::decode_rows(y, lattice::MapDecoder(sigma, delta, bound), xhat);
  } else {
    throw UsageError("unknown decoder '" + name + "'");
  }
  const auto report = lattice::evaluate_unwrapping(x, xhat, delta, name);
  Output out(c.out);
  csv::Writer w(out.stream());
  w.header({"decoder", "n", "n_errors", "p_e_hat"});
  w.field(report.decoder_name).field(report.n).field(report.n_errors).field(report.p_e_hat);
  w.end_row();
  out.finish();
  return kExitOk;
}

int run_sample(const config::ExperimentConfig& c) {
  if (c.x_path.empty() && c.y_path.empty() && c.flags_path.empty())
    throw UsageError("sample: give at least one of --x, --y, --flags as output paths");
  const std::size_t k = config::resolve_k(c, 2);
  const std::size_t n = config::resolve_n(c, k);
  const double nu = config::resolve_nu(c, k, 1.0);
  const double delta = config::resolve_delta(c, k);
  const double radius = config::resolve_radius(c, k);
  rngstat::RngStream rng(config::resolve_seed(c), 0);
  const auto m = c.u_path.empty() ? model::SpikedModel::random_direction(k, nu, rng)
                                  : model::SpikedModel(nu, read_direction(c.u_path, k));
  const auto batch = model::generate_batch(m, model::ModuloChannel(delta), n, radius, rng);
  auto write = [](const std::string& path, auto&& fn) {
    if (path.empty()) return;
    Output out(path);
    fn(out.stream());
    out.finish();
  };
  write(c.x_path, [&](std::ostream& os) { model::write_samples_csv(os, batch.x); });
  write(c.y_path, [&](std::ostream& os) { model::write_samples_csv(os, batch.y); });
  write(c.flags_path, [&](std::ostream& os) { model::write_flags_csv(os, batch.flags); });
  write(c.out, [&](std::ostream& os) { csv::write_vector(os, "u", m.u()); });
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spike estimation from modulo-folded samples, lattice unwrapping, and Monte-Carlo checks"};
  app.require_subcommand(1);

  Flags fa, fb, fv, fe, fd, fs;
  auto* fig3a = app.add_subcommand("fig3a", "estimation error vs spike exponent alpha");
  add_common(fig3a, fa);
  auto* fig3b = app.add_subcommand("fig3b", "unwrapping error rate vs delta exponent");
  add_common(fig3b, fb);
  auto* verify = app.add_subcommand("verify", "Monte-Carlo check of one lemma");
  std::string lemma;
  verify->add_option("lemma_id", lemma, "prop1|pball|convex|gap|badprob|voronoi|nball")
      ->required()
      ->check(CLI::IsMember(experiments::lemma_ids()));
  add_common(verify, fv);
  auto* estimate = app.add_subcommand("estimate", "ball-truncated PCA on a Y CSV (--y)");
  add_common(estimate, fe);
  auto* decode = app.add_subcommand("decode", "unwrap Y and score against X");
  std::string decoder;
  decode->add_option("decoder", decoder, "informed_if|blind_if|trivial|map")
      ->required()
      ->check(CLI::IsMember({"informed_if", "blind_if", "trivial", "map"}));
  add_common(decode, fd);
  auto* sample = app.add_subcommand("sample", "draw a batch and write X/Y/flags CSVs");
  add_common(sample, fs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fig3a) return run_fig3a(resolve(fa));
    if (*fig3b) return run_fig3b(resolve(fb));
    if (*verify) return run_verify(resolve(fv), lemma);
    if (*estimate) return run_estimate(resolve(fe));
    if (*decode) return run_decode(resolve(fd), decoder);
    if (*sample) return run_sample(resolve(fs));
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const EstimationError& e) {
    std::cerr << "estimation failed: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
