#pragma once

#include "blo/problem.hpp"

namespace blo {

/// Proximal-gradient residual R_α(x, y) = y - Proj_Y(y - α ∇_y f(x, y)).
/// Zero exactly at lower-level stationary points.
struct Residual {
  Vector value;
  double norm = 0.0;
  double alpha = 0.0;
};

Residual residual(const BilevelProblem& problem, const Vector& x, const Vector& y, double alpha);

/// Same mapping when the gradient is already at hand.
Residual residual_from_gradient(const Vector& y, const Vector& grad_y, const BoxSet& box,
                                double alpha);

}  // namespace blo
