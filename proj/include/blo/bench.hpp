#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "blo/errors.hpp"
#include "blo/hyperclean.hpp"
#include "blo/problem.hpp"
#include "blo/solvers.hpp"

namespace blo {

// Experiment configuration ---------------------------------------------------

/// Malformed or unknown configuration entry. key() names the offending key.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string key, const std::string& what)
      : InvalidArgument(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct ExperimentConfig {
  std::string problem = "nonconvex-sine";
  /// convex-quadratic dimension.
  std::size_t problem_n = 50;
  HypercleanOptions hyperclean;

  SolverConfig solver = SolverConfig::nonconvex_defaults();

  /// Explicit starts; a single value is broadcast to every coordinate.
  /// When absent the start is drawn from init_seed (see start_point).
  std::optional<std::vector<double>> x0;
  std::optional<std::vector<double>> z0;
  std::uint64_t init_seed = 0;
  /// Sampling range for random starts on unbounded coordinates.
  double init_lo = 0.0;
  double init_hi = 2.0;

  std::size_t repetitions = 1;
  /// Empty writes to standard output.
  std::string output;
  std::size_t parallelism = 1;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Ordered key/value pairs as they appear in a config file.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// `key = value` lines, `#` starts a comment, blank lines ignored.
ConfigEntries parse_config_entries(const std::string& text);

/// Applies entries on top of the defaults of the named problem. Later entries
/// win. Throws ConfigError naming the first bad key.
ExperimentConfig config_from_entries(const ConfigEntries& entries);
ExperimentConfig parse_config(const std::string& text);

/// Canonical form: every key, sorted, one per line.
std::string emit_config(const ExperimentConfig& config);

std::vector<std::string> catalog_problems();
ProblemPtr make_problem(const ExperimentConfig& config);

/// Start for repetition `run_id`: explicit values, or uniform draws seeded by
/// split_seed(init_seed, run_id). Coordinates whose box is at most 100 wide
/// are drawn over the box, wider ones over [init_lo, init_hi] clipped to the
/// box. Hyper-cleaning starts x at 0 and z from the model initializer.
std::pair<Vector, Vector> start_point(const BilevelProblem& problem,
                                      const ExperimentConfig& config, std::uint64_t run_id);

// CSV logs ------------------------------------------------------------------

struct CsvRow {
  std::uint64_t run_id = 0;
  std::string method;
  std::size_t t = 0;
  double F_value = 0.0;
  std::optional<double> x_rel_err;
  std::optional<double> F_rel_err;
  std::size_t k_bar = 0;
  double grad_norm_x = 0.0;
  double grad_norm_z = 0.0;
  double residual = 0.0;
  std::optional<double> wall_millis;

  friend bool operator==(const CsvRow&, const CsvRow&) = default;
};

/// Input file whose header or field layout does not match the schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

const std::string& csv_header();
std::string format_row(const CsvRow& row);
void write_csv(std::ostream& out, const std::vector<CsvRow>& rows);
/// Throws SchemaError on a bad header, field count or number.
std::vector<CsvRow> read_csv(std::istream& in, const std::string& source = "<input>");

std::vector<CsvRow> rows_from_run(std::uint64_t run_id, const RunState& state);

// Runs ---------------------------------------------------------------------

/// All repetitions of one configuration, run on `parallelism` workers and
/// returned in run_id order.
std::vector<CsvRow> run_experiment(const ExperimentConfig& config);

struct SweepRun {
  std::uint64_t run_id;
  Method method;
  std::vector<double> x0;
  std::vector<double> z0;
};

/// methods x starts; run_id = method_index * starts.size() + start_index.
std::vector<SweepRun> plan_sweep(const std::vector<Method>& methods,
                                 const std::vector<std::pair<std::vector<double>, std::vector<double>>>& starts);
std::vector<CsvRow> run_sweep(const ExperimentConfig& base, const std::vector<SweepRun>& plan,
                              std::size_t parallelism);

// Summaries ------------------------------------------------------------------

struct SummaryRow {
  std::string source;
  std::uint64_t run_id = 0;
  std::string method;
  std::size_t iterations = 0;
  std::optional<double> final_x_rel_err;
  std::optional<double> final_F_rel_err;
  /// First t with x_rel_err below the threshold.
  std::optional<std::size_t> iterations_to_threshold;
  double mean_k_bar = 0.0;
  std::optional<double> total_wall_millis;
};

/// One row per (source, run_id, method), sorted by iterations-to-threshold;
/// runs that never reach it go last.
std::vector<SummaryRow> summarize(const std::vector<std::pair<std::string, std::vector<CsvRow>>>& inputs,
                                  double threshold);
std::string format_summary_table(const std::vector<SummaryRow>& rows);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

// Command line -----------------------------------------------------------------

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;

/// Subcommands run, sweep, verify, list and summarize. args excludes argv[0].
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace blo
