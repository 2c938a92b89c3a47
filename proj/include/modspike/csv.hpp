#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace modspike::csv {

/// `%.17g`: round-trips every double.
std::string format_double(double v);

std::vector<std::string> split_line(std::string_view line);

/// Strict parse: the whole field must be consumed. Throws UsageError.
double parse_double(std::string_view field);
long long parse_integer(std::string_view field);

/// Reads the next non-empty line (stripping a trailing '\r'); false at EOF.
bool read_line(std::istream& is, std::string& line);

/// Streams one row; fields joined with ',' and terminated by '\n'.
class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}
  void header(const std::vector<std::string>& names);
  Writer& field(std::string_view s);
  Writer& field(double v);
  Writer& field(long long v);
  Writer& field(unsigned long long v);
  Writer& field(std::size_t v) { return field(static_cast<unsigned long long>(v)); }
  Writer& field(int v) { return field(static_cast<long long>(v)); }
  void end_row();

 private:
  std::ostream& os_;
  bool first_ = true;
};

/// Two-column `coord,<value_name>` vector file; coords must run 0, 1, ...
void write_vector(std::ostream& os, const std::string& value_name, const std::vector<double>& v);
/// Throws UsageError on a malformed file.
std::vector<double> read_vector(std::istream& is);

}  // namespace modspike::csv
