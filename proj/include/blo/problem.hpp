#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>

#include "blo/box.hpp"
#include "blo/vector.hpp"

namespace blo {

struct KnownOptimum {
  Vector x;
  Vector y;
  double upper_value;
};

/// Bounds m <= f(x, y) <= M over X x Y.
struct ValueRange {
  double min;
  double max;
};

/// A bilevel problem
///
///   min_{x in X} F(x, y)   s.t.  y in argmin_{y in Y} f(x, y)
///
/// F is the upper-level objective, f the lower-level one. Derivatives are
/// supplied analytically; the curvature oracles are optional and the
/// hypergradient code falls back to finite differences of the gradients when
/// they are absent (see HvpPolicy).
class BilevelProblem {
 public:
  virtual ~BilevelProblem() = default;

  virtual std::string name() const = 0;

  std::size_t upper_dim() const noexcept { return upper_box_.size(); }
  std::size_t lower_dim() const noexcept { return lower_box_.size(); }
  const BoxSet& upper_box() const noexcept { return upper_box_; }
  const BoxSet& lower_box() const noexcept { return lower_box_; }

  virtual double upper(const Vector& x, const Vector& y) const = 0;
  virtual double lower(const Vector& x, const Vector& y) const = 0;

  virtual Vector grad_x_upper(const Vector& x, const Vector& y) const = 0;
  virtual Vector grad_y_upper(const Vector& x, const Vector& y) const = 0;
  virtual Vector grad_y_lower(const Vector& x, const Vector& y) const = 0;

  /// Needed only by the finite-difference fallback for hvp_xy_lower.
  virtual std::optional<Vector> grad_x_lower(const Vector& x, const Vector& y) const;

  virtual bool has_hvp_yy() const { return false; }
  virtual bool has_hvp_xy() const { return false; }
  /// ∇²_yy f(x, y) v
  virtual Vector hvp_yy_lower(const Vector& x, const Vector& y, const Vector& v) const;
  /// (∂/∂x ∇_y f(x, y))ᵀ v, a vector in R^n.
  virtual Vector hvp_xy_lower(const Vector& x, const Vector& y, const Vector& v) const;

  /// Lipschitz constant of ∇_y f in y, when known.
  virtual std::optional<double> lipschitz() const { return std::nullopt; }
  virtual std::optional<KnownOptimum> known_optimum() const { return std::nullopt; }
  /// Exact range of f over X x Y, when known analytically.
  virtual std::optional<ValueRange> lower_value_range() const { return std::nullopt; }
  /// min_{y in Y} f(x, y), when available in closed form.
  virtual std::optional<double> lower_optimal_value(const Vector& x) const;
  /// f(x, y) - min_y f(x, ·). The default subtracts lower_optimal_value;
  /// problems override it when a cancellation-free form exists.
  virtual std::optional<double> lower_suboptimality(const Vector& x, const Vector& y) const;

 protected:
  BilevelProblem(BoxSet upper_box, BoxSet lower_box)
      : upper_box_(std::move(upper_box)), lower_box_(std::move(lower_box)) {}

 private:
  BoxSet upper_box_;
  BoxSet lower_box_;
};

using ProblemPtr = std::shared_ptr<const BilevelProblem>;

// Catalog ---------------------------------------------------------------

/// F(x, y) = x + x y, f(x, y) = -sin(x y), X = [1, 10], Y = [-2, 2].
/// Unique solution (11π/4, -2).
ProblemPtr nonconvex_sine();

/// F = ‖x - y₂‖⁴ + ‖y₁ - e‖⁴, f = ½‖y₁‖² - xᵀy₁ with y = (y₁, y₂) ∈ R^{2n},
/// X = [-100, 100]^n and Y a ±1e6 box. Solution x = y₁ = y₂ = e.
ProblemPtr convex_quadratic(std::size_t n);

inline constexpr double kLargeBox = 1e6;

}  // namespace blo
