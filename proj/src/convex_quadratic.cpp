#include <cmath>

#include <fmt/format.h>

#include "blo/errors.hpp"
#include "blo/problem.hpp"

namespace blo {
namespace {

// y = (y1, y2), both blocks of size n; y2 does not enter f.
class ConvexQuadratic final : public BilevelProblem {
 public:
  explicit ConvexQuadratic(std::size_t n)
      : BilevelProblem(BoxSet::uniform(n, -100.0, 100.0), BoxSet::uniform(2 * n, -kLargeBox, kLargeBox)),
        n_(n) {}

  std::string name() const override { return "convex-quadratic"; }

  double upper(const Vector& x, const Vector& y) const override {
    double a = 0.0;
    double b = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double d2 = x[i] - y[n_ + i];
      const double d1 = y[i] - 1.0;
      a += d2 * d2;
      b += d1 * d1;
    }
    return a * a + b * b;
  }

  double lower(const Vector& x, const Vector& y) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += 0.5 * y[i] * y[i] - x[i] * y[i];
    return s;
  }

  Vector grad_x_upper(const Vector& x, const Vector& y) const override {
    const double a = sq_x_minus_y2(x, y);
    Vector g(n_);
    for (std::size_t i = 0; i < n_; ++i) g[i] = 4.0 * a * (x[i] - y[n_ + i]);
    return g;
  }

  Vector grad_y_upper(const Vector& x, const Vector& y) const override {
    const double a = sq_x_minus_y2(x, y);
    double b = 0.0;
    for (std::size_t i = 0; i < n_; ++i) b += (y[i] - 1.0) * (y[i] - 1.0);
    Vector g(2 * n_);
    for (std::size_t i = 0; i < n_; ++i) {
      g[i] = 4.0 * b * (y[i] - 1.0);
      g[n_ + i] = -4.0 * a * (x[i] - y[n_ + i]);
    }
    return g;
  }

  Vector grad_y_lower(const Vector& x, const Vector& y) const override {
    Vector g(2 * n_);
    for (std::size_t i = 0; i < n_; ++i) g[i] = y[i] - x[i];
    return g;
  }

  std::optional<Vector> grad_x_lower(const Vector&, const Vector& y) const override {
    Vector g(n_);
    for (std::size_t i = 0; i < n_; ++i) g[i] = -y[i];
    return g;
  }

  bool has_hvp_yy() const override { return true; }
  bool has_hvp_xy() const override { return true; }
  Vector hvp_yy_lower(const Vector&, const Vector&, const Vector& v) const override {
    Vector out(2 * n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = v[i];
    return out;
  }
  Vector hvp_xy_lower(const Vector&, const Vector&, const Vector& v) const override {
    Vector out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = -v[i];
    return out;
  }

  std::optional<double> lipschitz() const override { return 1.0; }

  std::optional<KnownOptimum> known_optimum() const override {
    return KnownOptimum{Vector(n_, 1.0), Vector(2 * n_, 1.0), 0.0};
  }

  std::optional<double> lower_optimal_value(const Vector& x) const override {
    return -0.5 * dot(x, x);
  }

  // ½‖y₁ - x‖², free of the cancellation in f - f*.
  std::optional<double> lower_suboptimality(const Vector& x, const Vector& y) const override {
    double a = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double d = y[i] - x[i];
      a += d * d;
    }
    return 0.5 * a;
  }

 private:
  double sq_x_minus_y2(const Vector& x, const Vector& y) const {
    double a = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double d = x[i] - y[n_ + i];
      a += d * d;
    }
    return a;
  }

  std::size_t n_;
};

}  // namespace

ProblemPtr convex_quadratic(std::size_t n) {
  if (n == 0) throw InvalidArgument("convex_quadratic: n must be positive");
  return std::make_shared<ConvexQuadratic>(n);
}

}  // namespace blo
