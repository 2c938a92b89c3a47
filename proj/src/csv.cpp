#include "modspike/csv.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>

#include "modspike/error.hpp"

namespace modspike::csv {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view field) {
  // strtod accepts inf/nan and hex forms; from_chars for double is missing on older libstdc++.
  const std::string s(field);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw UsageError("expected a number, got '" + s + "'");
  return v;
}

long long parse_integer(std::string_view field) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw UsageError("expected an integer, got '" + std::string(field) + "'");
  return v;
}

bool read_line(std::istream& is, std::string& line) {
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

void Writer::header(const std::vector<std::string>& names) {
  for (const auto& n : names) field(n);
  end_row();
}

Writer& Writer::field(std::string_view s) {
  if (!first_) os_ << ',';
  os_ << s;
  first_ = false;
  return *this;
}

Writer& Writer::field(double v) { return field(std::string_view(format_double(v))); }

Writer& Writer::field(long long v) { return field(std::string_view(std::to_string(v))); }

Writer& Writer::field(unsigned long long v) { return field(std::string_view(std::to_string(v))); }

void Writer::end_row() {
  os_ << '\n';
  first_ = true;
}

void write_vector(std::ostream& os, const std::string& value_name, const std::vector<double>& v) {
  Writer w(os);
  w.header({"coord", value_name});
  for (std::size_t i = 0; i < v.size(); ++i) {
    w.field(i).field(v[i]);
    w.end_row();
  }
}

std::vector<double> read_vector(std::istream& is) {
  std::string line;
  if (!read_line(is, line)) throw UsageError("vector CSV: missing header");
  const auto head = split_line(line);
  if (head.size() != 2 || head[0] != "coord") throw UsageError("vector CSV: expected header 'coord,<name>'");
  std::vector<double> v;
  while (read_line(is, line)) {
    const auto f = split_line(line);
    if (f.size() != 2) throw UsageError("vector CSV: expected 2 fields per row");
    if (parse_integer(f[0]) != static_cast<long long>(v.size()))
      throw UsageError("vector CSV: coords must be 0, 1, 2, ...");
    v.push_back(parse_double(f[1]));
  }
  if (v.empty()) throw UsageError("vector CSV: no rows");
  return v;
}

}  // namespace modspike::csv
