#pragma once

#include "blo/problem.hpp"

namespace blo {

/// How second-order products are obtained during adjoint sweeps.
struct HvpPolicy {
  enum class Mode {
    analytic,           // problem oracles only; missing ones raise CapabilityError
    finite_difference,  // central differences of the gradients, always
    automatic,          // analytic where provided, finite differences otherwise
  };
  Mode mode = Mode::automatic;
  /// Base step; the actual step is fd_step * (1 + ‖y‖) / ‖v‖.
  double fd_step = 1e-6;

  friend bool operator==(const HvpPolicy&, const HvpPolicy&) = default;
};

/// Second-order products of f (and, for aggregated dynamics, of F) under an HvpPolicy.
class Curvature {
 public:
  Curvature(const BilevelProblem& problem, HvpPolicy policy);

  /// ∇²_yy f(x, y) v
  Vector lower_yy(const Vector& x, const Vector& y, const Vector& v) const;
  /// (∂_x ∇_y f(x, y))ᵀ v
  Vector lower_xy(const Vector& x, const Vector& y, const Vector& v) const;
  /// ∇²_yy F(x, y) v, always by finite differences.
  Vector upper_yy(const Vector& x, const Vector& y, const Vector& v) const;
  /// (∂_x ∇_y F(x, y))ᵀ v, always by finite differences.
  Vector upper_xy(const Vector& x, const Vector& y, const Vector& v) const;

  const HvpPolicy& policy() const noexcept { return policy_; }

 private:
  const BilevelProblem& problem_;
  HvpPolicy policy_;
};

}  // namespace blo
