#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "blo/errors.hpp"
#include "blo/hypergrad.hpp"
#include "blo/residual.hpp"
#include "blo/solvers.hpp"

namespace blo {
namespace {

// Adaptive-moment state for one block of variables.
struct MomentState {
  Vector m;
  Vector v;
  std::size_t steps = 0;
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

Vector outer_step(const Vector& current, const Vector& grad, double lr, OuterOptimizer opt,
                  MomentState& moments, const BoxSet& box) {
  Vector next = current;
  if (opt == OuterOptimizer::projected_gd) {
    axpy(-lr, grad, next);
    return project(next, box);
  }
  if (moments.m.size() != grad.size()) {
    moments.m = Vector(grad.size());
    moments.v = Vector(grad.size());
  }
  ++moments.steps;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(moments.steps));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(moments.steps));
  for (std::size_t i = 0; i < grad.size(); ++i) {
    moments.m[i] = kBeta1 * moments.m[i] + (1.0 - kBeta1) * grad[i];
    moments.v[i] = kBeta2 * moments.v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
    next[i] -= lr * (moments.m[i] / c1) / (std::sqrt(moments.v[i] / c2) + kAdamEps);
  }
  return project(next, box);
}

bool updates_initialization(Method m) {
  return m == Method::iaptt_gm || m == Method::ia_gm || m == Method::ia_gm_a;
}

std::optional<double> relative_error(double value, double reference) {
  if (reference == 0.0) return std::nullopt;
  return std::abs(value - reference) / std::abs(reference);
}

HyperGradient method_gradient(const BilevelProblem& problem, const SolverConfig& config,
                              const TrajectoryRecord& rec, std::size_t k_bar) {
  switch (config.method) {
    case Method::implicit_ls: {
      CgOptions cg;
      cg.max_iterations = config.implicit_iterations;
      return implicit_ls(problem, rec.x, rec.ys.back(), cg, config.hvp);
    }
    case Method::implicit_ns:
      return implicit_ns(problem, rec.x, rec.ys.back(), config.inner_schedule.at(0),
                         config.implicit_iterations, config.hvp);
    case Method::t_rhg: {
      UnrollOptions opts{config.hvp, config.truncate_at.value_or((config.K + 1) / 2)};
      return unrolled_reverse(problem, rec, k_bar, opts);
    }
    default:
      return unrolled_reverse(problem, rec, k_bar, UnrollOptions{config.hvp, std::nullopt});
  }
}

RunState run_loop(const BilevelProblem& problem, const SolverConfig& config, const Vector& x0,
                  const Vector& z0) {
  config.validate();
  if (x0.size() != problem.upper_dim() || z0.size() != problem.lower_dim()) {
    throw InvalidArgument(fmt::format("{}: initial point dimensions ({}, {}) do not match ({}, {})",
                                      to_string(config.method), x0.size(), z0.size(),
                                      problem.upper_dim(), problem.lower_dim()));
  }
  const DynamicsSpec spec = dynamics_for(config);
  const auto optimum = problem.known_optimum();
  const double residual_alpha = config.method == Method::ia_gm_a && config.nesterov_alpha
                                    ? *config.nesterov_alpha
                                    : config.inner_schedule.lo();

  RunState state;
  state.method = config.method;
  state.x = project(x0, problem.upper_box());
  state.z = project(z0, problem.lower_box());
  state.logs.reserve(config.T);

  MomentState mx;
  MomentState mz;
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t t = 0; t < config.T; ++t) {
    TrajectoryRecord rec;
    HyperGradient grad;
    std::size_t k_bar = config.K;
    bool tie = false;
    try {
      rec = run_dynamics(problem, state.x, state.z, config.K, spec);
      if (config.method == Method::iaptt_gm) {
        k_bar = ptt_select(rec.upper_values);
        const double top = rec.upper_values[k_bar - 1];
        for (std::size_t k = k_bar; k < rec.upper_values.size(); ++k) {
          if (rec.upper_values[k] == top) tie = true;
        }
      }
      grad = method_gradient(problem, config, rec, k_bar);
      if (!grad.g_x.all_finite() || !grad.g_z.all_finite()) {
        throw NumericalFailure("non-finite hypergradient", t);
      }
    } catch (const NumericalFailure& e) {
      throw NumericalFailure(fmt::format("{}: {} (outer step {})", to_string(config.method),
                                         e.what(), t),
                             t);
    }

    const Vector& y_bar = rec.ys[k_bar];
    IterateLog log;
    log.t = t;
    log.F_value = rec.upper_values[k_bar - 1];
    log.k_bar = k_bar;
    log.tie = tie;
    log.grad_norm_x = norm(grad.g_x);
    log.grad_norm_z = updates_initialization(config.method) ? norm(grad.g_z) : 0.0;
    log.residual = residual(problem, state.x, y_bar, residual_alpha).norm;
    if (optimum) {
      const double ref = norm(optimum->x);
      if (ref > 0.0) log.x_rel_err = distance(state.x, optimum->x) / ref;
      log.F_rel_err = relative_error(log.F_value, optimum->upper_value);
    }

    state.x = outer_step(state.x, grad.g_x, config.alpha_x, config.outer_optimizer, mx,
                         problem.upper_box());
    if (updates_initialization(config.method)) {
      state.z = outer_step(state.z, grad.g_z, config.alpha_z, config.outer_optimizer, mz,
                           problem.lower_box());
    }
    if (config.record_timing) {
      log.wall_millis = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    }
    state.logs.push_back(log);
    state.last_k_bar = k_bar;
    state.t = t + 1;
  }
  return state;
}

}  // namespace

std::size_t ptt_select(std::span<const double> F_values) {
  if (F_values.empty()) throw InvalidArgument("ptt_select: empty trajectory");
  std::size_t best = 0;
  for (std::size_t k = 1; k < F_values.size(); ++k) {
    if (F_values[k] > F_values[best]) best = k;
  }
  return best + 1;
}

DynamicsSpec dynamics_for(const SolverConfig& config) {
  DynamicsSpec spec;
  spec.schedule = config.inner_schedule;
  switch (config.method) {
    case Method::ia_gm_a:
      spec.kind = DynamicsKind::nesterov;
      spec.nesterov_alpha = config.nesterov_alpha;
      spec.paper_t_rule = config.paper_t_rule;
      break;
    case Method::bda:
      spec.kind = DynamicsKind::aggregated;
      spec.mu = config.mu;
      break;
    default:
      spec.kind = DynamicsKind::projected_gradient;
  }
  return spec;
}

RunState run_iaptt_gm(const BilevelProblem& problem, const SolverConfig& config, const Vector& x0,
                      const Vector& z0) {
  if (config.method != Method::iaptt_gm) {
    throw InvalidArgument(
        fmt::format("run_iaptt_gm: config selects '{}'", to_string(config.method)));
  }
  return run_loop(problem, config, x0, z0);
}

RunState run_variant(const BilevelProblem& problem, const SolverConfig& config, const Vector& x0,
                     const Vector& z0) {
  if (config.method == Method::iaptt_gm) {
    throw InvalidArgument("run_variant: use run_iaptt_gm for iaptt-gm");
  }
  return run_loop(problem, config, x0, z0);
}

RunState run_solver(const BilevelProblem& problem, const SolverConfig& config, const Vector& x0,
                    const Vector& z0) {
  return config.method == Method::iaptt_gm ? run_iaptt_gm(problem, config, x0, z0)
                                           : run_variant(problem, config, x0, z0);
}

double average_k_bar(const RunState& state) {
  if (state.method != Method::iaptt_gm) {
    throw InvalidArgument(
        fmt::format("average_k_bar: run used '{}', not iaptt-gm", to_string(state.method)));
  }
  if (state.logs.empty()) throw InvalidArgument("average_k_bar: no logged iterations");
  double s = 0.0;
  for (const auto& log : state.logs) s += static_cast<double>(log.k_bar);
  return s / static_cast<double>(state.logs.size());
}

}  // namespace blo
