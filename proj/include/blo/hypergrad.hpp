#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "blo/curvature.hpp"
#include "blo/dynamics.hpp"
#include "blo/problem.hpp"

namespace blo {

enum class HyperMethod { unrolled, implicit_ls, implicit_ns, finite_diff };

/// Outer gradients (∇_x, ∇_z) of F(x, y_k̄(x, z)).
struct HyperGradient {
  Vector g_x;
  Vector g_z;
  std::size_t k_used = 0;
  HyperMethod method = HyperMethod::unrolled;

  // Diagnostics.
  bool reliable = true;
  /// finite_diff: coordinates of the stacked (x, z) whose perturbation changed
  /// the projection pattern, so the difference quotient straddles a kink.
  std::vector<std::size_t> unreliable_coords;
  /// CG iterations or Neumann terms actually used.
  std::size_t iterations = 0;
  /// implicit_ns: norm of each partial sum of the series.
  std::vector<double> series_norms;
  std::string note;
};

struct UnrollOptions {
  HvpPolicy policy;
  /// Backpropagate only through the last `horizon` steps before k̄.
  std::optional<std::size_t> horizon;
};

/// Reverse adjoint sweep over the first k̄ steps of a recorded trajectory.
/// Cost is linear in k̄.
HyperGradient unrolled_reverse(const BilevelProblem& problem, const TrajectoryRecord& record,
                               std::size_t k_bar, const UnrollOptions& options = {});

/// Central finite differences of (x, z) -> F(x, y_k̄(x, z)), regenerating the
/// trajectory for every perturbation. k̄ is held fixed.
HyperGradient fd_hypergrad(const BilevelProblem& problem, const Vector& x, const Vector& z,
                           std::size_t K, std::size_t k_bar, const DynamicsSpec& dynamics,
                           double h = 1e-6);

struct CgOptions {
  double tol = 1e-10;
  /// 0 means 10 * lower_dim.
  std::size_t max_iterations = 0;
  /// Residual norm (α = 1) above which y* is reported as not stationary.
  double stationarity_tol = 1e-6;
};

/// Implicit hypergradient with v solving ∇²_yy f v = ∇_y F by conjugate
/// gradients on the normal equations (minimum-norm solution when the Hessian
/// is singular). g_z is zero.
HyperGradient implicit_ls(const BilevelProblem& problem, const Vector& x, const Vector& y_star,
                          const CgOptions& options = {}, const HvpPolicy& policy = {});

/// Implicit hypergradient with v ≈ α Σ_{i<terms} (I - α∇²_yy f)^i ∇_y F.
/// The series is valid only when α‖∇²_yy f‖ < 1; this is not checked.
HyperGradient implicit_ns(const BilevelProblem& problem, const Vector& x, const Vector& y_star,
                          double alpha, std::size_t terms, const HvpPolicy& policy = {});

}  // namespace blo
