#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "blo/bench.hpp"

namespace blo {
namespace {

constexpr std::size_t kColumns = 11;

std::string number(double v) { return fmt::format("{:.17g}", v); }
std::string number(const std::optional<double>& v) { return v ? number(*v) : std::string(); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

struct FieldReader {
  const std::string& source;
  std::size_t line;

  [[noreturn]] void fail(const char* column, const std::string& text) const {
    throw SchemaError(fmt::format("{}:{}: column {}: cannot parse '{}'", source, line, column, text));
  }

  double real(const char* column, const std::string& text) const {
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc{} || ptr != end) fail(column, text);
    return v;
  }

  std::optional<double> maybe(const char* column, const std::string& text) const {
    if (text.empty()) return std::nullopt;
    return real(column, text);
  }

  std::uint64_t integer(const char* column, const std::string& text) const {
    std::uint64_t v = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc{} || ptr != end) fail(column, text);
    return v;
  }
};

}  // namespace

const std::string& csv_header() {
  static const std::string header =
      "run_id,method,t,F_value,x_rel_err,F_rel_err,k_bar,grad_norm_x,grad_norm_z,residual,"
      "wall_millis";
  return header;
}

std::string format_row(const CsvRow& row) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{}", row.run_id, row.method, row.t,
                     number(row.F_value), number(row.x_rel_err), number(row.F_rel_err), row.k_bar,
                     number(row.grad_norm_x), number(row.grad_norm_z), number(row.residual),
                     number(row.wall_millis));
}

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
  out << csv_header() << '\n';
  for (const CsvRow& row : rows) out << format_row(row) << '\n';
}

std::vector<CsvRow> read_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != csv_header()) {
    throw SchemaError(fmt::format("{}: header does not match the log schema: '{}'", source, line));
  }
  std::vector<CsvRow> rows;
  std::size_t number_line = 1;
  while (std::getline(in, line)) {
    ++number_line;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != kColumns) {
      throw SchemaError(fmt::format("{}:{}: expected {} fields, got {}", source, number_line,
                                    kColumns, f.size()));
    }
    const FieldReader r{source, number_line};
    CsvRow row;
    row.run_id = r.integer("run_id", f[0]);
    if (f[1].empty()) r.fail("method", f[1]);
    row.method = f[1];
    row.t = static_cast<std::size_t>(r.integer("t", f[2]));
    row.F_value = r.real("F_value", f[3]);
    row.x_rel_err = r.maybe("x_rel_err", f[4]);
    row.F_rel_err = r.maybe("F_rel_err", f[5]);
    row.k_bar = static_cast<std::size_t>(r.integer("k_bar", f[6]));
    row.grad_norm_x = r.real("grad_norm_x", f[7]);
    row.grad_norm_z = r.real("grad_norm_z", f[8]);
    row.residual = r.real("residual", f[9]);
    row.wall_millis = r.maybe("wall_millis", f[10]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace blo
