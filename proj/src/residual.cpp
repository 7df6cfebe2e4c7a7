#include "blo/residual.hpp"

#include "blo/errors.hpp"

namespace blo {

Residual residual_from_gradient(const Vector& y, const Vector& grad_y, const BoxSet& box,
                                double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("residual: alpha must be positive");
  Vector step = y;
  axpy(-alpha, grad_y, step);
  Vector value = y - project(step, box);
  const double n = blo::norm(value);
  return Residual{std::move(value), n, alpha};
}

Residual residual(const BilevelProblem& problem, const Vector& x, const Vector& y, double alpha) {
  const Vector g = problem.grad_y_lower(x, y);
  if (!g.all_finite()) throw NumericalFailure("residual: non-finite lower-level gradient", 0);
  return residual_from_gradient(y, g, problem.lower_box(), alpha);
}

}  // namespace blo
