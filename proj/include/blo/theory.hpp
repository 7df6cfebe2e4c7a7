#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "blo/dynamics.hpp"
#include "blo/problem.hpp"

namespace blo {

// Closed-form structure of the non-convex sine toy ---------------------------

/// Global lower-level minimizers S(x) = {(2kπ + π/2)/x} ∩ [-2, 2], sorted.
std::vector<double> sine_global_minimizers(double x);

/// Stationary set Ŝ(x): interior critical points (kπ + π/2)/x plus the
/// boundary points ±2 whenever they satisfy the projected-gradient condition.
std::vector<double> sine_stationary_points(double x);

/// φ(x) = min over S(x) of F(x, y) = x + x y. `grid_points` is unused because
/// the enumeration is exact; it keeps the generic oracle signature.
double phi_oracle_sine(double x, std::size_t grid_points = 0);

// Residual rate ---------------------------------------------------------------

struct RateCheckReport {
  std::vector<std::size_t> K_grid;
  /// sup over samples of min_{0<=k<=K} ‖R_α̲(x, y_k)‖, per K.
  std::vector<double> worst_min_residual;
  /// sup over K of worst_min_residual * √(K+1).
  double fitted_constant = 0.0;
  /// √((M - m) / (1/ᾱ - L_f/2)).
  double analytic_bound = 0.0;
  double f_min = 0.0;
  double f_max = 0.0;
  double alpha_lo = 0.0;
  double alpha_hi = 0.0;
  std::size_t samples = 0;

  bool bound_holds() const noexcept { return fitted_constant <= analytic_bound; }
};

/// Samples (x, z) uniformly from X x Y and measures the best residual along
/// projected-GD trajectories. Needs compact boxes and a Lipschitz constant.
RateCheckReport rate_check(const BilevelProblem& problem, const std::vector<std::size_t>& K_grid,
                           std::size_t sample_count, const StepSchedule& schedule,
                           std::uint64_t seed);

// Value-function gap ---------------------------------------------------------

struct PhiGapOptions {
  StepSchedule schedule = StepSchedule::constant(0.0005);
  std::size_t polish_steps = 50;
  std::size_t workers = 0;
};

struct PhiReport {
  std::vector<std::size_t> K_grid;
  /// inf φ by exact enumeration.
  double phi_true_min = 0.0;
  double phi_true_argmin = 0.0;
  /// Per K: estimate of inf φ_K over X x Y, and where it was found.
  std::vector<double> phi_K_min;
  std::vector<double> argmin_x;
  std::vector<double> argmin_z;
  /// phi_true_min - phi_K_min.
  std::vector<double> gap;
  /// min over the x grid of min_{y in Ŝ(x)} F(x, y).
  double shat_grid_min = 0.0;
};

/// φ_K(x, z) = max_{1<=k<=K} F(x, y_k(x, z)) minimized by dense grid search
/// followed by projected-gradient polishing from the best cell.
PhiReport phi_gap_check(const BilevelProblem& problem, const std::vector<std::size_t>& K_grid,
                        std::size_t x_grid_points, std::size_t z_grid_points,
                        const PhiGapOptions& options = {});

// Lower-level convergence under convexity -------------------------------------

struct DecayReport {
  std::vector<std::size_t> K_grid;
  /// sup over samples of f(x, y_K) - min_y f(x, y).
  std::vector<double> worst_gap;
  /// Least-squares slope of log(worst_gap) against log(K + 1).
  double slope = 0.0;
};

/// Needs `lower_optimal_value`. Samples x from X and z from Y, both clipped to
/// [-radius, radius].
DecayReport lower_gap_decay(const BilevelProblem& problem, const std::vector<std::size_t>& K_grid,
                            std::size_t sample_count, const DynamicsSpec& dynamics,
                            std::uint64_t seed, double radius = 10.0);

double loglog_slope(const std::vector<std::size_t>& K_grid, const std::vector<double>& values);

// Fixed points ----------------------------------------------------------------

struct FixedPointReport {
  std::size_t cases = 0;
  /// max over cases and k of ‖y_k - z‖ (and ‖u_k - z‖ for Nesterov).
  double max_drift = 0.0;
  double max_residual = 0.0;
};

/// Starts `count` trajectories at closed-form stationary points of the catalog
/// problems and measures how far they move.
FixedPointReport fixed_point_suite(std::size_t count, std::size_t K, std::uint64_t seed);

// Hypergradient oracle suite ---------------------------------------------------

struct HypergradSuiteReport {
  std::size_t configurations = 0;
  std::size_t failures = 0;
  /// max over configurations of ‖unrolled - fd‖ / ‖fd‖ on the stacked (g_x, g_z).
  double worst_relative_error = 0.0;
  /// ‖g_x(unrolled, K = 200) - g_x(implicit_ls)‖_∞ on convex_quadratic.
  double implicit_gap = 0.0;

  bool passed(double implicit_tol = 1e-4) const noexcept {
    return failures == 0 && implicit_gap <= implicit_tol;
  }
};

/// Random interior configurations on the sine toy and convex_quadratic
/// (n <= 5, K <= 20) under both projected-gradient and Nesterov dynamics.
/// A configuration fails when ‖unrolled - fd‖ > rtol ‖fd‖ + atol.
HypergradSuiteReport hypergrad_oracle_suite(std::size_t count, std::uint64_t seed,
                                            double rtol = 1e-5, double atol = 1e-8);

// Local optimality probe --------------------------------------------------------

struct LocalProbe {
  double residual = 0.0;
  /// Smallest F over Ŝ-consistent points within delta; compare to F(x, y).
  double best_neighbor = 0.0;
  double value = 0.0;
  bool improvable = false;
};

/// Checks (x, y) on the sine toy against stationary points (x', y') with
/// |x' - x| <= delta, |y' - y| <= delta.
LocalProbe local_minimum_probe_sine(double x, double y, double alpha, double delta = 0.05,
                                    std::size_t grid = 201);

}  // namespace blo
