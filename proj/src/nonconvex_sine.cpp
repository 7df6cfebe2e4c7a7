#include <cmath>
#include <numbers>

#include "blo/problem.hpp"

namespace blo {
namespace {

class NonconvexSine final : public BilevelProblem {
 public:
  NonconvexSine() : BilevelProblem(BoxSet::uniform(1, 1.0, 10.0), BoxSet::uniform(1, -2.0, 2.0)) {}

  std::string name() const override { return "nonconvex-sine"; }

  double upper(const Vector& x, const Vector& y) const override { return x[0] + x[0] * y[0]; }
  double lower(const Vector& x, const Vector& y) const override { return -std::sin(x[0] * y[0]); }

  Vector grad_x_upper(const Vector&, const Vector& y) const override { return Vector{1.0 + y[0]}; }
  Vector grad_y_upper(const Vector& x, const Vector&) const override { return Vector{x[0]}; }
  Vector grad_y_lower(const Vector& x, const Vector& y) const override {
    return Vector{-x[0] * std::cos(x[0] * y[0])};
  }
  std::optional<Vector> grad_x_lower(const Vector& x, const Vector& y) const override {
    return Vector{-y[0] * std::cos(x[0] * y[0])};
  }

  bool has_hvp_yy() const override { return true; }
  bool has_hvp_xy() const override { return true; }
  Vector hvp_yy_lower(const Vector& x, const Vector& y, const Vector& v) const override {
    const double a = x[0];
    return Vector{a * a * std::sin(a * y[0]) * v[0]};
  }
  Vector hvp_xy_lower(const Vector& x, const Vector& y, const Vector& v) const override {
    const double p = x[0] * y[0];
    return Vector{(-std::cos(p) + p * std::sin(p)) * v[0]};
  }

  std::optional<double> lipschitz() const override { return 100.0; }  // sup over X of x²

  std::optional<KnownOptimum> known_optimum() const override {
    constexpr double x_star = 11.0 * std::numbers::pi / 4.0;
    return KnownOptimum{Vector{x_star}, Vector{-2.0}, -x_star};
  }

  std::optional<ValueRange> lower_value_range() const override { return ValueRange{-1.0, 1.0}; }

  // Every x in [1, 10] admits some x y ≡ π/2 (mod 2π) with |y| <= 2.
  std::optional<double> lower_optimal_value(const Vector&) const override { return -1.0; }
};

}  // namespace

ProblemPtr nonconvex_sine() { return std::make_shared<NonconvexSine>(); }

}  // namespace blo
