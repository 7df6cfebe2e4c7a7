#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blo/curvature.hpp"
#include "blo/dynamics.hpp"
#include "blo/problem.hpp"

namespace blo {

enum class Method { iaptt_gm, ia_gm, ia_gm_a, rhg, t_rhg, bda, implicit_ls, implicit_ns };

std::string_view to_string(Method m);
/// Throws InvalidArgument for unknown names.
Method parse_method(std::string_view name);
std::span<const Method> all_methods();

enum class OuterOptimizer { projected_gd, adaptive_moment };

std::string_view to_string(OuterOptimizer o);
OuterOptimizer parse_outer_optimizer(std::string_view name);

struct SolverConfig {
  Method method = Method::iaptt_gm;
  std::size_t T = 500;  // outer iterations
  std::size_t K = 40;   // inner iterations
  StepSchedule inner_schedule = StepSchedule::constant(0.0005);
  double alpha_x = 0.1;
  double alpha_z = 0.1;
  std::optional<std::size_t> truncate_at;  // t-rhg
  double mu = 0.4;                         // bda
  OuterOptimizer outer_optimizer = OuterOptimizer::projected_gd;
  std::uint64_t seed = 0;

  // Nesterov dynamics (ia-gm-a).
  std::optional<double> nesterov_alpha;
  bool paper_t_rule = false;

  /// CG iteration cap / Neumann terms for the implicit baselines.
  std::size_t implicit_iterations = 40;
  HvpPolicy hvp;
  /// Record wall-clock time per outer step.
  bool record_timing = false;

  void validate() const;

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;

  /// Non-convex toy settings: 500 outer / 40 inner steps, inner step 5e-4, outer 0.1.
  static SolverConfig nonconvex_defaults();
  /// Hyper-cleaning: 3000 / 50, inner 0.03, outer 0.01 with an adaptive-moment outer step.
  static SolverConfig hyperclean_defaults();
  /// Convex acceleration study: 1000 / 20, inner 0.15, outer 0.005.
  static SolverConfig convex_defaults();
};

struct IterateLog {
  std::size_t t = 0;
  double F_value = 0.0;  // F(x^t, y_k̄)
  std::optional<double> x_rel_err;
  std::optional<double> F_rel_err;
  std::size_t k_bar = 0;
  double grad_norm_x = 0.0;
  double grad_norm_z = 0.0;
  std::optional<double> wall_millis;  // cumulative
  double residual = 0.0;              // ‖R_α̲(x^t, y_k̄)‖
  /// PTT ties at this step (more than one index attained the max).
  bool tie = false;
};

struct RunState {
  Method method = Method::iaptt_gm;
  Vector x;
  Vector z;
  std::size_t t = 0;
  std::size_t last_k_bar = 0;
  std::vector<IterateLog> logs;
};

/// Smallest 1-based index attaining the maximum.
std::size_t ptt_select(std::span<const double> F_values);

/// Inner dynamics a method uses under `config`.
DynamicsSpec dynamics_for(const SolverConfig& config);

/// IAPTT-GM: inner projected GD from z^t, pessimistic truncation at
/// k̄ = argmax_k F(x^t, y_k), projected outer steps on both x and z.
RunState run_iaptt_gm(const BilevelProblem& problem, const SolverConfig& config, const Vector& x0,
                      const Vector& z0);

/// Every other method in `Method`, sharing the loop and logging contract.
RunState run_variant(const BilevelProblem& problem, const SolverConfig& config, const Vector& x0,
                     const Vector& z0);

/// Dispatch on config.method.
RunState run_solver(const BilevelProblem& problem, const SolverConfig& config, const Vector& x0,
                    const Vector& z0);

/// Mean k̄ over an IAPTT-GM run.
double average_k_bar(const RunState& state);

}  // namespace blo
