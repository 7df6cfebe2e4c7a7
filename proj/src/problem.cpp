#include "blo/problem.hpp"

#include "blo/errors.hpp"

namespace blo {

std::optional<Vector> BilevelProblem::grad_x_lower(const Vector&, const Vector&) const {
  return std::nullopt;
}

Vector BilevelProblem::hvp_yy_lower(const Vector&, const Vector&, const Vector&) const {
  throw CapabilityError(name() + ": no analytic ∇²_yy f oracle");
}

Vector BilevelProblem::hvp_xy_lower(const Vector&, const Vector&, const Vector&) const {
  throw CapabilityError(name() + ": no analytic ∂_x∇_y f oracle");
}

std::optional<double> BilevelProblem::lower_optimal_value(const Vector&) const {
  return std::nullopt;
}

std::optional<double> BilevelProblem::lower_suboptimality(const Vector& x, const Vector& y) const {
  const auto best = lower_optimal_value(x);
  if (!best) return std::nullopt;
  return lower(x, y) - *best;
}

}  // namespace blo
