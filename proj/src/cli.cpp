#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "blo/bench.hpp"
#include "blo/theory.hpp"

namespace blo {
namespace {

struct ExitRequest {
  int code;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::size_t> parse_K_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (const std::string& item : split(text, ',')) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || v == 0) throw ConfigError("--K", fmt::format("bad K value '{}'", item));
    out.push_back(v);
  }
  if (out.empty() || !std::is_sorted(out.begin(), out.end()) ||
      std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw ConfigError("--K", "K values must be strictly increasing");
  }
  return out;
}

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(what, fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Options shared by run and sweep; every one maps onto a config key.
struct ExperimentFlags {
  std::string config_path;
  std::vector<std::pair<const char*, std::string>> values;
  std::vector<std::string> sets;
  bool timing = false;

  void attach(CLI::App& app, bool with_starts) {
    app.add_option("--config", config_path, "Config file (key = value lines)");
    static const std::vector<std::pair<const char*, const char*>> mapped{
        {"--problem", "problem.name"},      {"--n", "problem.n"},
        {"--method", "solver.method"},      {"--T", "solver.T"},
        {"--K", "solver.K"},                {"--alpha-y", "solver.alpha_y"},
        {"--alpha-x", "solver.alpha_x"},    {"--alpha-z", "solver.alpha_z"},
        {"--mu", "solver.mu"},              {"--truncate-at", "solver.truncate_at"},
        {"--seed", "solver.seed"},          {"--init-seed", "init.seed"},
        {"--x0", "init.x0"},                {"--z0", "init.z0"},
        {"--repetitions", "run.repetitions"}, {"--parallelism", "run.parallelism"},
        {"-o,--output", "run.output"},
    };
    values.reserve(mapped.size());
    for (const auto& [flag, key] : mapped) {
      const std::string_view f(flag);
      if (!with_starts && (f == "--x0" || f == "--z0" || f == "--method" || f == "--repetitions")) {
        continue;
      }
      values.emplace_back(key, std::string());
      app.add_option(flag, values.back().second, fmt::format("Sets {}", key))->allow_extra_args(false);
    }
    app.add_option("--set", sets, "Extra key=value entries, applied last");
    app.add_flag("--timing", timing, "Record cumulative wall time per outer step");
  }

  ExperimentConfig resolve() const {
    ConfigEntries entries;
    if (!config_path.empty()) entries = parse_config_entries(read_file(config_path, "--config"));
    for (const auto& [key, value] : values) {
      if (!value.empty()) entries.emplace_back(key, value);
    }
    if (timing) entries.emplace_back("solver.timing", "true");
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError(s, "--set expects key=value");
      auto trim = [](std::string t) {
        t.erase(0, t.find_first_not_of(' '));
        t.erase(t.find_last_not_of(' ') + 1);
        return t;
      };
      entries.emplace_back(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    return config_from_entries(entries);
  }
};

void emit_rows(const std::vector<CsvRow>& rows, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    write_csv(out, rows);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("run.output", fmt::format("cannot write '{}'", path));
  write_csv(file, rows);
}

int verify_rate(const std::vector<std::size_t>& K_grid, std::size_t samples, double alpha,
                std::uint64_t seed, std::ostream& out) {
  const ProblemPtr sine = nonconvex_sine();
  if (!(alpha > 0.0)) alpha = 1.0 / *sine->lipschitz();
  const RateCheckReport r = rate_check(*sine, K_grid, samples, StepSchedule::constant(alpha), seed);
  fmt::print(out, "rate: {} samples, alpha {}, f range [{}, {}]\n", r.samples, alpha, r.f_min, r.f_max);
  for (std::size_t i = 0; i < r.K_grid.size(); ++i) {
    fmt::print(out, "  K {:>5}  worst min residual {:.6e}  scaled {:.6e}\n", r.K_grid[i],
               r.worst_min_residual[i],
               r.worst_min_residual[i] * std::sqrt(static_cast<double>(r.K_grid[i]) + 1.0));
  }
  const bool ok = r.bound_holds();
  fmt::print(out, "  fitted constant {:.6e} vs bound {:.6e}: {}\n", r.fitted_constant,
             r.analytic_bound, ok ? "ok" : "VIOLATED");
  return ok ? kExitOk : kExitVerifyFailed;
}

int verify_phi(const std::vector<std::size_t>& K_grid, std::size_t grid, std::size_t polish,
               std::size_t workers, std::ostream& out) {
  constexpr double kSlack = 1e-3;
  constexpr double kArgminTol = 0.1;
  PhiGapOptions opts;
  opts.polish_steps = polish;
  opts.workers = workers;
  const PhiReport r = phi_gap_check(*nonconvex_sine(), K_grid, grid, grid, opts);
  fmt::print(out, "phi: inf phi = {:.9f} at x = {:.6f}; min over S-hat grid {:.9f}\n",
             r.phi_true_min, r.phi_true_argmin, r.shat_grid_min);
  bool ok = true;
  for (std::size_t i = 0; i < r.K_grid.size(); ++i) {
    const bool lower_bound = r.phi_K_min[i] <= r.shat_grid_min + kSlack;
    ok = ok && lower_bound;
    fmt::print(out, "  K {:>5}  phi_K min {:.9f} at ({:.6f}, {:.6f})  gap {:.3e}{}\n", r.K_grid[i],
               r.phi_K_min[i], r.argmin_x[i], r.argmin_z[i], r.gap[i],
               lower_bound ? "" : "  LOWER BOUND VIOLATED");
  }
  const double x_star = 11.0 * std::numbers::pi / 4.0;
  const bool shrinks = r.gap.size() < 2 || std::abs(r.gap.back()) < std::abs(r.gap.front());
  const bool located = std::abs(r.argmin_x.back() - x_star) <= kArgminTol;
  fmt::print(out, "  gap shrinks: {}; argmin within {} of 11pi/4: {}\n", shrinks ? "ok" : "NO",
             kArgminTol, located ? "ok" : "NO");
  ok = ok && shrinks && located;
  return ok ? kExitOk : kExitVerifyFailed;
}

int verify_hypergrad(std::size_t samples, std::uint64_t seed, std::ostream& out) {
  const HypergradSuiteReport r = hypergrad_oracle_suite(samples, seed);
  fmt::print(out, "hypergrad: {} configurations, {} failures, worst rel err {:.3e}; implicit gap {:.3e}\n",
             r.configurations, r.failures, r.worst_relative_error, r.implicit_gap);
  return r.passed() ? kExitOk : kExitVerifyFailed;
}

int verify_fixed_point(std::size_t samples, std::size_t K, std::uint64_t seed, std::ostream& out) {
  constexpr double kDriftTol = 1e-12;
  constexpr double kResidualTol = 1e-10;
  const FixedPointReport r = fixed_point_suite(samples, K, seed);
  const bool ok = r.max_drift <= kDriftTol && r.max_residual < kResidualTol;
  fmt::print(out, "fixed-point: {} cases, max drift {:.3e}, max residual {:.3e}: {}\n", r.cases,
             r.max_drift, r.max_residual, ok ? "ok" : "VIOLATED");
  return ok ? kExitOk : kExitVerifyFailed;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bilevel optimization experiments"};
  app.name("blo_bench");
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one experiment and write its CSV log");
  ExperimentFlags run_flags;
  run_flags.attach(*run, true);
  bool emit = false;
  run->add_flag("--emit-config", emit, "Print the resolved config and exit");

  auto* sweep = app.add_subcommand("sweep", "Cross methods with initializations");
  ExperimentFlags sweep_flags;
  sweep_flags.attach(*sweep, false);
  std::string methods_text = "iaptt-gm,ia-gm,rhg";
  std::string starts_text = "1:2;5:1;7:-1";
  sweep->add_option("--methods", methods_text, "Comma-separated method names")->capture_default_str();
  sweep->add_option("--starts", starts_text, "Semicolon-separated x0:z0 pairs")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "Check the theoretical guarantees numerically");
  std::string suite = "all";
  std::string K_text;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  std::size_t grid = 200;
  std::size_t polish = 50;
  std::size_t workers = 0;
  std::size_t fixed_K = 40;
  verify->add_option("--suite", suite, "rate, phi, hypergrad, fixed-point or all")
      ->check(CLI::IsMember({"rate", "phi", "hypergrad", "fixed-point", "all"}));
  verify->add_option("--K", K_text, "Comma-separated inner iteration counts");
  verify->add_option("--samples", samples, "Samples per suite (0 = suite default)");
  verify->add_option("--seed", seed, "Root seed");
  verify->add_option("--alpha", alpha, "Inner step for the rate check (0 = 1/L)");
  verify->add_option("--grid", grid, "Grid points per axis for the phi check");
  verify->add_option("--polish", polish, "Polishing steps for the phi check");
  verify->add_option("--workers", workers, "Worker threads (0 = all cores)");
  verify->add_option("--fixed-K", fixed_K, "Inner steps for the fixed-point suite");

  auto* list = app.add_subcommand("list", "List catalog problems and methods");

  auto* summary = app.add_subcommand("summarize", "Summarize CSV logs");
  std::vector<std::string> inputs;
  double threshold = 0.05;
  std::string summary_out;
  summary->add_option("files", inputs, "CSV logs")->required();
  summary->add_option("--threshold", threshold, "Relative x error threshold");
  summary->add_option("-o,--output", summary_out, "Machine-readable summary CSV");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    throw ExitRequest{code == 0 ? kExitOk : kExitUsage};
  }

  if (run->parsed()) {
    const ExperimentConfig config = run_flags.resolve();
    if (emit) {
      out << emit_config(config);
      return kExitOk;
    }
    emit_rows(run_experiment(config), config.output, out);
    return kExitOk;
  }

  if (sweep->parsed()) {
    const ExperimentConfig base = sweep_flags.resolve();
    std::vector<Method> methods;
    for (const std::string& name : split(methods_text, ',')) {
      try {
        methods.push_back(parse_method(name));
      } catch (const InvalidArgument& e) {
        throw ConfigError("--methods", e.what());
      }
    }
    std::vector<std::pair<std::vector<double>, std::vector<double>>> starts;
    for (const std::string& pair : split(starts_text, ';')) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos) throw ConfigError("--starts", fmt::format("bad start '{}'", pair));
      const ExperimentConfig probe = config_from_entries(
          {{"init.x0", pair.substr(0, colon)}, {"init.z0", pair.substr(colon + 1)}});
      starts.emplace_back(*probe.x0, *probe.z0);
    }
    if (methods.empty() || starts.empty()) throw ConfigError("--starts", "nothing to sweep");
    const auto plan = plan_sweep(methods, starts);
    for (const SweepRun& r : plan) {
      fmt::print(err, "run {}: {} x0={} z0={}\n", r.run_id, to_string(r.method),
                 fmt::join(r.x0, ","), fmt::join(r.z0, ","));
    }
    emit_rows(run_sweep(base, plan, base.parallelism), base.output, out);
    return kExitOk;
  }

  if (verify->parsed()) {
    const bool all = suite == "all";
    int code = kExitOk;
    auto grid_or = [&](const char* fallback) {
      return parse_K_list(K_text.empty() ? std::string(fallback) : K_text);
    };
    if (all || suite == "rate") {
      code = std::max(code, verify_rate(grid_or("10,40,160,640"), samples ? samples : 200, alpha, seed, out));
    }
    if (all || suite == "phi") {
      code = std::max(code, verify_phi(grid_or("10,40,160,640"), grid, polish, workers, out));
    }
    if (all || suite == "hypergrad") {
      code = std::max(code, verify_hypergrad(samples ? samples : 50, seed, out));
    }
    if (all || suite == "fixed-point") {
      code = std::max(code, verify_fixed_point(samples ? samples : 100, fixed_K, seed, out));
    }
    return code;
  }

  if (list->parsed()) {
    out << "problems:\n";
    for (const std::string& p : catalog_problems()) out << "  " << p << '\n';
    out << "methods:\n";
    for (Method m : all_methods()) out << "  " << to_string(m) << '\n';
    return kExitOk;
  }

  if (summary->parsed()) {
    std::vector<std::pair<std::string, std::vector<CsvRow>>> loaded;
    for (const std::string& path : inputs) {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw SchemaError(fmt::format("cannot open '{}'", path));
      loaded.emplace_back(path, read_csv(in, path));
    }
    const auto rows = summarize(loaded, threshold);
    out << format_summary_table(rows);
    if (!summary_out.empty()) {
      std::ofstream file(summary_out, std::ios::binary);
      if (!file) throw ConfigError("--output", fmt::format("cannot write '{}'", summary_out));
      write_summary_csv(file, rows);
    }
    return kExitOk;
  }
  return kExitUsage;
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const ExitRequest& e) {
    return e.code;
  } catch (const ConfigError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const SchemaError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    fmt::print(err, "failed: {}\n", e.what());
    return kExitVerifyFailed;
  }
}

}  // namespace blo
