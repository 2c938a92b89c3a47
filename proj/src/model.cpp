#include "modspike/model.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "modspike/csv.hpp"
#include "modspike/error.hpp"
#include "modspike/kernels.hpp"

namespace modspike::model {

SpikedModel::SpikedModel(double nu, std::vector<double> u) : nu_(nu), u_(std::move(u)) {
  if (!(nu_ >= 0.0) || !std::isfinite(nu_)) throw DomainError("SpikedModel: nu must be finite and >= 0");
  if (u_.empty()) throw DomainError("SpikedModel: direction must have dimension >= 1");
  if (std::abs(linalg::norm2(u_) - 1.0) > 1e-12) throw DomainError("SpikedModel: direction must be a unit vector");
}

SpikedModel SpikedModel::random_direction(std::size_t k, double nu, rngstat::RngStream& rng) {
  return SpikedModel(nu, rngstat::uniform_sphere(k, rng));
}

ModuloChannel::ModuloChannel(double delta) : delta_(delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("ModuloChannel: delta must be finite and > 0");
}

double modulo_reduce(double x, double delta) {
  const double half = 0.5 * delta;
  if (x >= -half && x < half) return x;
  double m = std::floor(x / delta + 0.5);
  double r = x - m * delta;
  // x / delta rounds; nudge the multiple until the half-open bounds hold.
  for (int i = 0; i < 4 && (r >= half || r < -half); ++i) {
    m += r >= half ? 1.0 : -1.0;
    r = x - m * delta;
  }
  return r;
}

Matrix sample_spiked(const SpikedModel& model, std::size_t n, rngstat::RngStream& rng) {
  Matrix x(n, model.k());
  kernels::parallel::sample_spiked(model.u(), model.nu(), rng.master_seed(), rng.next_u64(), x);
  return x;
}

Matrix apply_channel(const Matrix& x, const ModuloChannel& channel) {
  Matrix y;
  kernels::parallel::fold(x, channel.delta(), y);
  return y;
}

std::vector<SampleFlags> classify_batch(const Matrix& x, const Matrix& y, double radius) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw DomainError("classify_batch: X and Y shapes differ");
  if (!(radius > 0.0)) throw DomainError("classify_batch: radius must be > 0");
  const double r2 = radius * radius;
  std::vector<SampleFlags> flags(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto xi = x.row(i);
    const auto yi = y.row(i);
    double nx = 0.0, ny = 0.0;
    bool same = true;
    for (std::size_t j = 0; j < xi.size(); ++j) {
      nx += xi[j] * xi[j];
      ny += yi[j] * yi[j];
      same = same && xi[j] == yi[j];
    }
    auto& f = flags[i];
    f.in_ball = ny <= r2;
    f.x_in_ball = nx <= r2;
    f.good = f.in_ball && same;
    f.bad = f.in_ball && !same;
  }
  return flags;
}

namespace {
template <class Pred>
std::size_t count_if_flag(const std::vector<SampleFlags>& flags, Pred pred) {
  std::size_t c = 0;
  for (const auto& f : flags) c += pred(f) ? 1 : 0;
  return c;
}
}  // namespace

std::size_t SampleBatch::count_in_ball() const {
  return count_if_flag(flags, [](const SampleFlags& f) { return f.in_ball; });
}
std::size_t SampleBatch::count_x_in_ball() const {
  return count_if_flag(flags, [](const SampleFlags& f) { return f.x_in_ball; });
}
std::size_t SampleBatch::count_good() const {
  return count_if_flag(flags, [](const SampleFlags& f) { return f.good; });
}
std::size_t SampleBatch::count_bad() const {
  return count_if_flag(flags, [](const SampleFlags& f) { return f.bad; });
}

SampleBatch generate_batch(const SpikedModel& model, const ModuloChannel& channel, std::size_t n,
                           double radius, rngstat::RngStream& rng) {
  SampleBatch b;
  b.x = sample_spiked(model, n, rng);
  b.y = apply_channel(b.x, channel);
  b.flags = classify_batch(b.x, b.y, radius);
  return b;
}

void write_samples_csv(std::ostream& os, const Matrix& m) {
  csv::Writer w(os);
  w.field("sample_id");
  for (std::size_t j = 0; j < m.cols(); ++j) w.field("coord_" + std::to_string(j));
  w.end_row();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    w.field(i);
    for (double v : m.row(i)) w.field(v);
    w.end_row();
  }
}

Matrix read_samples_csv(std::istream& is) {
  std::string line;
  if (!csv::read_line(is, line)) throw UsageError("sample CSV: missing header");
  const auto header = csv::split_line(line);
  if (header.size() < 2 || header[0] != "sample_id") throw UsageError("sample CSV: header must start with sample_id");
  const std::size_t k = header.size() - 1;
  for (std::size_t j = 0; j < k; ++j)
    if (header[j + 1] != "coord_" + std::to_string(j)) throw UsageError("sample CSV: unexpected column '" + header[j + 1] + "'");
  std::vector<double> values;
  std::size_t n = 0;
  while (csv::read_line(is, line)) {
    const auto fields = csv::split_line(line);
    if (fields.size() != k + 1) throw UsageError("sample CSV: row " + std::to_string(n) + " has wrong field count");
    if (csv::parse_integer(fields[0]) != static_cast<long long>(n))
      throw UsageError("sample CSV: sample_id out of sequence at row " + std::to_string(n));
    for (std::size_t j = 0; j < k; ++j) values.push_back(csv::parse_double(fields[j + 1]));
    ++n;
  }
  Matrix m(n, k);
  std::copy(values.begin(), values.end(), m.data().begin());
  return m;
}

void write_flags_csv(std::ostream& os, const std::vector<SampleFlags>& flags) {
  csv::Writer w(os);
  w.header({"sample_id", "in_ball", "x_in_ball", "good", "bad"});
  for (std::size_t i = 0; i < flags.size(); ++i) {
    const auto& f = flags[i];
    w.field(i).field(int(f.in_ball)).field(int(f.x_in_ball)).field(int(f.good)).field(int(f.bad));
    w.end_row();
  }
}

std::vector<SampleFlags> read_flags_csv(std::istream& is) {
  std::string line;
  if (!csv::read_line(is, line) || line != "sample_id,in_ball,x_in_ball,good,bad")
    throw UsageError("flags CSV: bad header");
  std::vector<SampleFlags> out;
  auto bit = [](const std::string& s) {
    if (s == "0") return false;
    if (s == "1") return true;
    throw UsageError("flags CSV: expected 0/1, got '" + s + "'");
  };
  while (csv::read_line(is, line)) {
    const auto f = csv::split_line(line);
    if (f.size() != 5) throw UsageError("flags CSV: wrong field count");
    if (csv::parse_integer(f[0]) != static_cast<long long>(out.size()))
      throw UsageError("flags CSV: sample_id out of sequence");
    out.push_back({bit(f[1]), bit(f[2]), bit(f[3]), bit(f[4])});
  }
  return out;
}

}  // namespace modspike::model
