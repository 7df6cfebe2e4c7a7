#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "blo/curvature.hpp"
#include "blo/problem.hpp"

namespace blo {

/// Inner step sizes α_y^k. A constant schedule stores one value.
class StepSchedule {
 public:
  static StepSchedule constant(double alpha);
  static StepSchedule per_step(std::vector<double> alphas);

  bool is_constant() const noexcept { return values_.size() == 1; }
  /// Step used at inner iteration k; per-step lists repeat their last entry.
  double at(std::size_t k) const noexcept {
    return values_[k < values_.size() ? k : values_.size() - 1];
  }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Throws InvalidArgument unless hi < 2 / lipschitz.
  void check_window(double lipschitz) const;

  friend bool operator==(const StepSchedule&, const StepSchedule&) = default;

 private:
  explicit StepSchedule(std::vector<double> values);
  std::vector<double> values_;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

enum class DynamicsKind {
  projected_gradient,  // y_{k+1} = Proj_Y(y_k - α_k ∇_y f)
  nesterov,            // accelerated proximal gradient with momentum sequence t_k
  aggregated,          // Proj_Y(y_k - α_k (μ ∇_y F + (1 - μ) ∇_y f))
};

/// Everything needed to regenerate a trajectory from (x, z).
struct DynamicsSpec {
  DynamicsKind kind = DynamicsKind::projected_gradient;
  StepSchedule schedule = StepSchedule::constant(1e-3);
  /// Nesterov step; defaults to 1 / L_f when the problem knows L_f.
  std::optional<double> nesterov_alpha;
  /// Use t_{k+1} = (1 + √(1 + t_k²)) / 2 instead of the standard 4 t_k² rule.
  bool paper_t_rule = false;
  /// Upper-level weight for aggregated dynamics.
  double mu = 0.0;
  double mask_tolerance = kDefaultMaskTolerance;
};

/// Full forward record of an inner trajectory.
struct TrajectoryRecord {
  DynamicsKind kind = DynamicsKind::projected_gradient;
  Vector x;
  /// y_0 .. y_K; y_0 is the (projected) initialization z.
  std::vector<Vector> ys;
  /// w_0 .. w_{K-1}: the arguments handed to each projection.
  std::vector<Vector> pre_projection;
  /// Interior masks of each w_k (projection Jacobian diagonals).
  std::vector<Vector> masks;
  /// Nesterov only: extrapolated points u_0 .. u_{K-1} and t_0 .. t_K.
  std::vector<Vector> us;
  std::vector<double> ts;
  /// F(x, y_k) for k = 1 .. K (index k-1).
  std::vector<double> upper_values;
  /// Step size per inner iteration (α_y^k or the Nesterov α).
  std::vector<double> steps;
  double mu = 0.0;

  std::size_t size() const noexcept { return ys.empty() ? 0 : ys.size() - 1; }
};

TrajectoryRecord pgd_forward(const BilevelProblem& problem, const Vector& x, const Vector& z,
                             std::size_t K, const StepSchedule& schedule,
                             double mask_tolerance = kDefaultMaskTolerance);

struct NesterovOptions {
  std::optional<double> alpha;
  bool paper_t_rule = false;
  double mask_tolerance = kDefaultMaskTolerance;
};

TrajectoryRecord nesterov_forward(const BilevelProblem& problem, const Vector& x, const Vector& z,
                                  std::size_t K, const NesterovOptions& options = {});

TrajectoryRecord aggregated_forward(const BilevelProblem& problem, const Vector& x,
                                    const Vector& z, std::size_t K, const StepSchedule& schedule,
                                    double mu, double mask_tolerance = kDefaultMaskTolerance);

TrajectoryRecord run_dynamics(const BilevelProblem& problem, const Vector& x, const Vector& z,
                              std::size_t K, const DynamicsSpec& spec);

/// Next momentum coefficient from t_k.
double next_momentum(double t, bool paper_rule);

/// Reverse-mode state over the trajectory. `p` is the adjoint of y_{k+1}; for
/// Nesterov dynamics `p_aux` is the adjoint of u_{k+1} (empty otherwise).
struct AdjointState {
  Vector p;
  Vector p_aux;
};

struct AdjointStep {
  AdjointState state;  // adjoint of y_k (and u_k)
  Vector delta_gx;     // contribution of step k to ∇_x
};

/// Vector-Jacobian transition of inner step k (mapping y_k -> y_{k+1}).
AdjointStep adjoint_step(const BilevelProblem& problem, const TrajectoryRecord& record,
                         std::size_t k, const AdjointState& incoming, const Curvature& curvature);

}  // namespace blo
