#include <algorithm>
#include <map>
#include <ostream>
#include <tuple>

#include <fmt/format.h>

#include "blo/bench.hpp"

namespace blo {
namespace {

std::string cell(const std::optional<double>& v) { return v ? fmt::format("{:.6g}", *v) : ""; }
std::string exact(const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : ""; }
std::string cell(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : ""; }

}  // namespace

std::vector<SummaryRow> summarize(
    const std::vector<std::pair<std::string, std::vector<CsvRow>>>& inputs, double threshold) {
  using Key = std::tuple<std::size_t, std::uint64_t, std::string>;
  std::map<Key, SummaryRow> groups;
  std::map<Key, double> k_bar_sums;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (const CsvRow& row : inputs[i].second) {
      const Key key{i, row.run_id, row.method};
      SummaryRow& s = groups[key];
      if (s.iterations == 0) {
        s.source = inputs[i].first;
        s.run_id = row.run_id;
        s.method = row.method;
      }
      ++s.iterations;
      s.final_x_rel_err = row.x_rel_err;
      s.final_F_rel_err = row.F_rel_err;
      if (!s.iterations_to_threshold && row.x_rel_err && *row.x_rel_err < threshold) {
        s.iterations_to_threshold = row.t;
      }
      k_bar_sums[key] += static_cast<double>(row.k_bar);
      if (row.wall_millis) {
        s.total_wall_millis = std::max(s.total_wall_millis.value_or(0.0), *row.wall_millis);
      }
    }
  }
  std::vector<SummaryRow> out;
  for (auto& [key, s] : groups) {
    s.mean_k_bar = k_bar_sums[key] / static_cast<double>(s.iterations);
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const SummaryRow& a, const SummaryRow& b) {
    if (a.iterations_to_threshold.has_value() != b.iterations_to_threshold.has_value()) {
      return a.iterations_to_threshold.has_value();
    }
    if (a.iterations_to_threshold && *a.iterations_to_threshold != *b.iterations_to_threshold) {
      return *a.iterations_to_threshold < *b.iterations_to_threshold;
    }
    return false;
  });
  return out;
}

std::string format_summary_table(const std::vector<SummaryRow>& rows) {
  const std::vector<std::string> head{"source", "run_id", "method", "iters", "final_x_rel_err",
                                      "final_F_rel_err", "iters_to_threshold", "mean_k_bar",
                                      "wall_millis"};
  std::vector<std::vector<std::string>> table{head};
  for (const SummaryRow& r : rows) {
    table.push_back({r.source, std::to_string(r.run_id), r.method, std::to_string(r.iterations),
                     cell(r.final_x_rel_err), cell(r.final_F_rel_err),
                     cell(r.iterations_to_threshold), fmt::format("{:.2f}", r.mean_k_bar),
                     cell(r.total_wall_millis)});
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& line : table) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::string out;
  for (const auto& line : table) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      out += fmt::format("{:<{}}", line[c], width[c]);
      out += c + 1 < line.size() ? "  " : "\n";
    }
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "source,run_id,method,iterations,final_x_rel_err,final_F_rel_err,"
         "iterations_to_threshold,mean_k_bar,total_wall_millis\n";
  for (const SummaryRow& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{:.17g},{}\n", r.source, r.run_id, r.method,
                       r.iterations, exact(r.final_x_rel_err), exact(r.final_F_rel_err),
                       cell(r.iterations_to_threshold), r.mean_k_bar, exact(r.total_wall_millis));
  }
}

}  // namespace blo
