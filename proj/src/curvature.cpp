#include "blo/curvature.hpp"

#include "blo/errors.hpp"

namespace blo {
namespace {

// Central difference of a gradient map along y in direction v, scaled back to v.
template <typename Grad>
Vector directional_fd(const Vector& y, const Vector& v, double base_step, Grad&& grad) {
  const double vn = norm(v);
  if (vn == 0.0) return Vector(grad(y).size());
  const double h = base_step * (1.0 + norm(y)) / vn;
  Vector yp = y;
  Vector ym = y;
  axpy(h, v, yp);
  axpy(-h, v, ym);
  Vector d = grad(yp) - grad(ym);
  d *= 1.0 / (2.0 * h);
  return d;
}

}  // namespace

Curvature::Curvature(const BilevelProblem& problem, HvpPolicy policy)
    : problem_(problem), policy_(policy) {
  if (!(policy_.fd_step > 0.0)) throw InvalidArgument("HvpPolicy: fd_step must be positive");
}

Vector Curvature::lower_yy(const Vector& x, const Vector& y, const Vector& v) const {
  using Mode = HvpPolicy::Mode;
  if (policy_.mode != Mode::finite_difference && problem_.has_hvp_yy()) {
    return problem_.hvp_yy_lower(x, y, v);
  }
  if (policy_.mode == Mode::analytic) {
    throw CapabilityError(problem_.name() + ": analytic ∇²_yy f required but not provided");
  }
  return directional_fd(y, v, policy_.fd_step,
                        [&](const Vector& yy) { return problem_.grad_y_lower(x, yy); });
}

Vector Curvature::lower_xy(const Vector& x, const Vector& y, const Vector& v) const {
  using Mode = HvpPolicy::Mode;
  if (policy_.mode != Mode::finite_difference && problem_.has_hvp_xy()) {
    return problem_.hvp_xy_lower(x, y, v);
  }
  if (policy_.mode == Mode::analytic) {
    throw CapabilityError(problem_.name() + ": analytic ∂_x∇_y f required but not provided");
  }
  // (∂_x ∇_y f)ᵀ v = ∂_y(∇_x f) v, so difference ∇_x f along y.
  if (!problem_.grad_x_lower(x, y)) {
    throw CapabilityError(problem_.name() + ": finite-difference ∂_x∇_y f needs ∇_x f");
  }
  return directional_fd(y, v, policy_.fd_step,
                        [&](const Vector& yy) { return *problem_.grad_x_lower(x, yy); });
}

Vector Curvature::upper_yy(const Vector& x, const Vector& y, const Vector& v) const {
  return directional_fd(y, v, policy_.fd_step,
                        [&](const Vector& yy) { return problem_.grad_y_upper(x, yy); });
}

Vector Curvature::upper_xy(const Vector& x, const Vector& y, const Vector& v) const {
  return directional_fd(y, v, policy_.fd_step,
                        [&](const Vector& yy) { return problem_.grad_x_upper(x, yy); });
}

}  // namespace blo
