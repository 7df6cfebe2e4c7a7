#include <algorithm>

#include <fmt/format.h>

#include "blo/bench.hpp"
#include "blo/parallel.hpp"
#include "blo/rng.hpp"

namespace blo {
namespace {

constexpr double kWideBox = 100.0;

Vector fill(const std::optional<std::vector<double>>& given, const BoxSet& box, Rng& rng,
            const ExperimentConfig& config, const char* key) {
  const std::size_t n = box.size();
  Vector v(n);
  if (given) {
    if (given->size() != 1 && given->size() != n) {
      throw ConfigError(key, fmt::format("expected 1 or {} values, got {}", n, given->size()));
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = given->size() == 1 ? (*given)[0] : (*given)[i];
    return v;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double lo = box.lower()[i];
    double hi = box.upper()[i];
    if (hi - lo > kWideBox) {
      lo = std::clamp(config.init_lo, lo, hi);
      hi = std::clamp(config.init_hi, lo, hi);
    }
    v[i] = rng.uniform(lo, hi);
  }
  return v;
}

}  // namespace

std::vector<std::string> catalog_problems() {
  return {"nonconvex-sine", "convex-quadratic", "hyperclean"};
}

ProblemPtr make_problem(const ExperimentConfig& config) {
  if (config.problem == "nonconvex-sine") return nonconvex_sine();
  if (config.problem == "convex-quadratic") return convex_quadratic(config.problem_n);
  if (config.problem == "hyperclean") {
    try {
      return synthetic_hyperclean(config.hyperclean);
    } catch (const InvalidArgument& e) {
      throw ConfigError("problem", e.what());
    }
  }
  throw ConfigError("problem.name", fmt::format("unknown problem '{}'", config.problem));
}

std::pair<Vector, Vector> start_point(const BilevelProblem& problem,
                                      const ExperimentConfig& config, std::uint64_t run_id) {
  Rng rng(split_seed(config.init_seed, run_id));
  if (const auto* hc = dynamic_cast<const HypercleanProblem*>(&problem)) {
    Vector x = config.x0 ? fill(config.x0, problem.upper_box(), rng, config, "init.x0")
                         : Vector(problem.upper_dim());
    Vector z = config.z0 ? fill(config.z0, problem.lower_box(), rng, config, "init.z0")
                         : hc->initial_parameters(split_seed(config.init_seed, run_id));
    return {std::move(x), std::move(z)};
  }
  Vector x = fill(config.x0, problem.upper_box(), rng, config, "init.x0");
  Vector z = fill(config.z0, problem.lower_box(), rng, config, "init.z0");
  return {std::move(x), std::move(z)};
}

std::vector<CsvRow> rows_from_run(std::uint64_t run_id, const RunState& state) {
  std::vector<CsvRow> rows;
  rows.reserve(state.logs.size());
  const std::string method(to_string(state.method));
  for (const IterateLog& log : state.logs) {
    CsvRow row;
    row.run_id = run_id;
    row.method = method;
    row.t = log.t;
    row.F_value = log.F_value;
    row.x_rel_err = log.x_rel_err;
    row.F_rel_err = log.F_rel_err;
    row.k_bar = log.k_bar;
    row.grad_norm_x = log.grad_norm_x;
    row.grad_norm_z = log.grad_norm_z;
    row.residual = log.residual;
    row.wall_millis = log.wall_millis;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CsvRow> run_experiment(const ExperimentConfig& config) {
  const ProblemPtr problem = make_problem(config);
  std::vector<std::vector<CsvRow>> per_run(config.repetitions);
  parallel_for(
      config.repetitions,
      [&](std::size_t r) {
        SolverConfig solver = config.solver;
        solver.seed = split_seed(config.solver.seed, r);
        const auto [x0, z0] = start_point(*problem, config, r);
        per_run[r] = rows_from_run(r, run_solver(*problem, solver, x0, z0));
      },
      config.parallelism);
  std::vector<CsvRow> rows;
  for (auto& run : per_run) std::move(run.begin(), run.end(), std::back_inserter(rows));
  return rows;
}

std::vector<SweepRun> plan_sweep(
    const std::vector<Method>& methods,
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& starts) {
  std::vector<SweepRun> plan;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (std::size_t s = 0; s < starts.size(); ++s) {
      plan.push_back({m * starts.size() + s, methods[m], starts[s].first, starts[s].second});
    }
  }
  return plan;
}

std::vector<CsvRow> run_sweep(const ExperimentConfig& base, const std::vector<SweepRun>& plan,
                              std::size_t parallelism) {
  const ProblemPtr problem = make_problem(base);
  std::vector<std::vector<CsvRow>> per_run(plan.size());
  parallel_for(
      plan.size(),
      [&](std::size_t i) {
        const SweepRun& run = plan[i];
        ExperimentConfig config = base;
        config.solver.method = run.method;
        config.solver.seed = split_seed(base.solver.seed, run.run_id);
        config.x0 = run.x0;
        config.z0 = run.z0;
        config.solver.validate();
        const auto [x0, z0] = start_point(*problem, config, run.run_id);
        per_run[i] = rows_from_run(run.run_id, run_solver(*problem, config.solver, x0, z0));
      },
      parallelism);
  std::vector<CsvRow> rows;
  for (auto& run : per_run) std::move(run.begin(), run.end(), std::back_inserter(rows));
  return rows;
}

}  // namespace blo
