#include <doctest.h>

#include <cmath>
#include <memory>

#include "blo/errors.hpp"
#include "blo/hyperclean.hpp"
#include "blo/hypergrad.hpp"
#include "blo/rng.hpp"
#include "blo/solvers.hpp"

using namespace blo;

namespace {

bool close(const Vector& a, const Vector& b, double rtol, double atol = 1e-10) {
  return distance(a, b) <= rtol * std::max(norm(a), norm(b)) + atol;
}

// The sine toy with its upper level scaled by two.
class DoubledUpper final : public BilevelProblem {
 public:
  DoubledUpper() : BilevelProblem(nonconvex_sine()->upper_box(), nonconvex_sine()->lower_box()) {}
  std::string name() const override { return "doubled"; }
  double upper(const Vector& x, const Vector& y) const override { return 2.0 * base_->upper(x, y); }
  double lower(const Vector& x, const Vector& y) const override { return base_->lower(x, y); }
  Vector grad_x_upper(const Vector& x, const Vector& y) const override { return 2.0 * base_->grad_x_upper(x, y); }
  Vector grad_y_upper(const Vector& x, const Vector& y) const override { return 2.0 * base_->grad_y_upper(x, y); }
  Vector grad_y_lower(const Vector& x, const Vector& y) const override { return base_->grad_y_lower(x, y); }
  bool has_hvp_yy() const override { return true; }
  bool has_hvp_xy() const override { return true; }
  Vector hvp_yy_lower(const Vector& x, const Vector& y, const Vector& v) const override {
    return base_->hvp_yy_lower(x, y, v);
  }
  Vector hvp_xy_lower(const Vector& x, const Vector& y, const Vector& v) const override {
    return base_->hvp_xy_lower(x, y, v);
  }
  std::optional<double> lipschitz() const override { return 100.0; }

 private:
  ProblemPtr base_ = nonconvex_sine();
};

DynamicsSpec pgd_spec(double alpha) {
  DynamicsSpec s;
  s.schedule = StepSchedule::constant(alpha);
  return s;
}

}  // namespace

TEST_CASE("unrolled: zero seed at a fixed point") {
  const ProblemPtr q = convex_quadratic(3);
  const Vector e(3, 1.0);
  const Vector z = concat(e, e);
  const TrajectoryRecord r = pgd_forward(*q, e, z, 10, StepSchedule::constant(0.15));
  const HyperGradient g = unrolled_reverse(*q, r, 7);
  CHECK(g.g_z == Vector(6));
  CHECK(g.g_x == q->grad_x_upper(e, z));
  CHECK(g.k_used == 7);
}

TEST_CASE("unrolled: single step closed form") {
  const ProblemPtr q = convex_quadratic(2);
  const double a = 0.3;
  const Vector x{0.4, -0.7};
  const Vector z{1.5, 0.2, -0.3, 2.0};
  const TrajectoryRecord r = pgd_forward(*q, x, z, 1, StepSchedule::constant(a));
  const HyperGradient g = unrolled_reverse(*q, r, 1);

  // y₁ = (1 - a) z₁ + a x, y₂ = z₂.
  Vector y1(2), d1(2), d2(2);
  for (std::size_t i = 0; i < 2; ++i) {
    y1[i] = (1 - a) * z[i] + a * x[i];
    d1[i] = y1[i] - 1.0;
    d2[i] = x[i] - z[2 + i];
  }
  const double s1 = 4.0 * dot(d1, d1);
  const double s2 = 4.0 * dot(d2, d2);
  const Vector gx{s2 * d2[0] + a * s1 * d1[0], s2 * d2[1] + a * s1 * d1[1]};
  const Vector gz{(1 - a) * s1 * d1[0], (1 - a) * s1 * d1[1], -s2 * d2[0], -s2 * d2[1]};
  CHECK(close(g.g_x, gx, 1e-13));
  CHECK(close(g.g_z, gz, 1e-13));

  const HyperGradient fd = fd_hypergrad(*q, x, z, 1, 1, pgd_spec(a));
  CHECK(close(g.g_x, fd.g_x, 1e-6));
  CHECK(close(g.g_z, fd.g_z, 1e-6));
}

TEST_CASE("unrolled: sine toy from (1, 1.5) with the default schedule") {
  const ProblemPtr sine = nonconvex_sine();
  const TrajectoryRecord r = pgd_forward(*sine, Vector{1.0}, Vector{1.5}, 40, StepSchedule::constant(0.0005));
  const std::size_t k_bar = ptt_select(r.upper_values);
  const HyperGradient g = unrolled_reverse(*sine, r, k_bar);
  const HyperGradient fd = fd_hypergrad(*sine, Vector{1.0}, Vector{1.5}, 40, k_bar, pgd_spec(0.0005));
  CHECK(fd.reliable);
  CHECK(close(concat(g.g_x, g.g_z), concat(fd.g_x, fd.g_z), 1e-5));
}

TEST_CASE("unrolled: index range") {
  const ProblemPtr sine = nonconvex_sine();
  const TrajectoryRecord r = pgd_forward(*sine, Vector{1.0}, Vector{0.0}, 5, StepSchedule::constant(0.01));
  CHECK_THROWS_AS(unrolled_reverse(*sine, r, 0), InvalidArgument);
  CHECK_THROWS_AS(unrolled_reverse(*sine, r, 6), InvalidArgument);
}

TEST_CASE("unrolled: agrees with finite differences on random interior configurations") {
  Rng rng(77);
  int checked = 0;
  while (checked < 60) {
    const bool sine_case = checked % 2 == 0;
    const ProblemPtr p = sine_case ? nonconvex_sine() : convex_quadratic(1 + rng.index(5));
    Vector x(p->upper_dim()), z(p->lower_dim());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = sine_case ? rng.uniform(1.5, 9.5) : rng.uniform(-2, 2);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = sine_case ? rng.uniform(-1.5, 1.5) : rng.uniform(-2, 2);
    const double alpha = sine_case ? rng.uniform(0.001, 0.015) : rng.uniform(0.05, 0.5);
    const std::size_t K = 1 + rng.index(20);
    DynamicsSpec spec = pgd_spec(alpha);
    if ((checked / 2) % 2 == 1) {
      spec.kind = DynamicsKind::nesterov;
      spec.nesterov_alpha = alpha;
    }
    const TrajectoryRecord r = run_dynamics(*p, x, z, K, spec);
    const std::size_t k_bar = ptt_select(r.upper_values);
    const HyperGradient fd = fd_hypergrad(*p, x, z, K, k_bar, spec);
    if (!fd.reliable) continue;
    const HyperGradient g = unrolled_reverse(*p, r, k_bar);
    CAPTURE(checked);
    CHECK(close(concat(g.g_x, g.g_z), concat(fd.g_x, fd.g_z), 1e-5, 1e-8));
    ++checked;
  }
}

TEST_CASE("unrolled: finite-difference curvature fallback") {
  const ProblemPtr sine = nonconvex_sine();
  const TrajectoryRecord r = pgd_forward(*sine, Vector{3.0}, Vector{0.4}, 15, StepSchedule::constant(0.01));
  UnrollOptions fd_opts;
  fd_opts.policy.mode = HvpPolicy::Mode::finite_difference;
  const HyperGradient a = unrolled_reverse(*sine, r, 15);
  const HyperGradient b = unrolled_reverse(*sine, r, 15, fd_opts);
  CHECK(close(concat(a.g_x, a.g_z), concat(b.g_x, b.g_z), 1e-6));

  // No yy oracle and analytic-only policy: capability error.
  HypercleanOptions hc;
  hc.n_train = 8;
  hc.n_val = 8;
  const HypercleanProblem p(hc);
  const TrajectoryRecord rh = pgd_forward(p, Vector(p.upper_dim()), p.initial_parameters(1), 3,
                                          StepSchedule::constant(0.1));
  UnrollOptions analytic;
  analytic.policy.mode = HvpPolicy::Mode::analytic;
  CHECK_THROWS_AS(unrolled_reverse(p, rh, 3, analytic), CapabilityError);
  CHECK_NOTHROW(unrolled_reverse(p, rh, 3));
}

TEST_CASE("unrolled: linear in the upper-level seed") {
  const ProblemPtr sine = nonconvex_sine();
  const DoubledUpper twice;
  const TrajectoryRecord r1 = pgd_forward(*sine, Vector{2.5}, Vector{0.3}, 12, StepSchedule::constant(0.01));
  const TrajectoryRecord r2 = pgd_forward(twice, Vector{2.5}, Vector{0.3}, 12, StepSchedule::constant(0.01));
  const HyperGradient g1 = unrolled_reverse(*sine, r1, 9);
  const HyperGradient g2 = unrolled_reverse(twice, r2, 9);
  CHECK(g2.g_x == 2.0 * g1.g_x);
  CHECK(g2.g_z == 2.0 * g1.g_z);
}

TEST_CASE("unrolled: truncated horizon") {
  const ProblemPtr q = convex_quadratic(2);
  const Vector x{0.1, 0.2};
  const Vector z{1.0, -1.0, 0.5, 0.5};
  const TrajectoryRecord r = pgd_forward(*q, x, z, 10, StepSchedule::constant(0.2));
  UnrollOptions opts;
  opts.horizon = 10;
  const HyperGradient full = unrolled_reverse(*q, r, 10);
  const HyperGradient same = unrolled_reverse(*q, r, 10, opts);
  CHECK(full.g_x == same.g_x);
  opts.horizon = 3;
  const HyperGradient cut = unrolled_reverse(*q, r, 10, opts);
  CHECK(cut.g_z == Vector(4));
  CHECK_FALSE(cut.g_x == full.g_x);
}

TEST_CASE("finite differences: second-order accuracy") {
  const ProblemPtr sine = nonconvex_sine();
  const Vector x{4.0}, z{0.2};
  const TrajectoryRecord r = pgd_forward(*sine, x, z, 10, StepSchedule::constant(0.01));
  const HyperGradient exact = unrolled_reverse(*sine, r, 10);
  auto error = [&](double h) {
    const HyperGradient fd = fd_hypergrad(*sine, x, z, 10, 10, pgd_spec(0.01), h);
    return distance(concat(exact.g_x, exact.g_z), concat(fd.g_x, fd.g_z));
  };
  const double ratio = error(2e-3) / error(1e-3);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("finite differences: boundary crossings are flagged") {
  const ProblemPtr sine = nonconvex_sine();
  // Find z with z + 0.01 cos(z) = -2 so the first projection sits on the bound.
  double lo = -2.0, hi = -1.9;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid + 0.01 * std::cos(mid) < -2.0 ? lo : hi) = mid;
  }
  const HyperGradient fd = fd_hypergrad(*sine, Vector{1.0}, Vector{hi}, 3, 3, pgd_spec(0.01));
  CHECK_FALSE(fd.reliable);
  CHECK_FALSE(fd.unreliable_coords.empty());

  // A start on the bound is one-sided in z.
  CHECK_FALSE(fd_hypergrad(*sine, Vector{1.0}, Vector{2.0}, 40, 1, pgd_spec(0.0005)).reliable);

  const HyperGradient clean = fd_hypergrad(*sine, Vector{1.0}, Vector{0.0}, 3, 3, pgd_spec(0.01));
  CHECK(clean.reliable);
  CHECK_THROWS_AS(fd_hypergrad(*sine, Vector{1.0}, Vector{0.0}, 3, 4, pgd_spec(0.01)), InvalidArgument);
}

TEST_CASE("implicit_ls: quadratic block") {
  const ProblemPtr q = convex_quadratic(3);
  const Vector x{0.5, 2.0, -1.0};
  const Vector y = concat(x, Vector{0.3, 0.3, 0.3});
  const HyperGradient g = implicit_ls(*q, x, y);
  // v₁ = ∇_{y₁}F and ∂_x∇_{y₁}f = -I, so g_x = ∇_x F + ∇_{y₁}F.
  const Vector gy = q->grad_y_upper(x, y);
  const Vector gx = q->grad_x_upper(x, y);
  for (std::size_t i = 0; i < 3; ++i) CHECK(g.g_x[i] == doctest::Approx(gx[i] + gy[i]).epsilon(1e-10));
  CHECK(g.g_z == Vector(6));
  CHECK(g.reliable);
}

TEST_CASE("implicit_ls: zero right-hand side") {
  const ProblemPtr q = convex_quadratic(2);
  const Vector e(2, 1.0);
  const HyperGradient g = implicit_ls(*q, e, concat(e, e));
  CHECK(g.iterations == 0);
  CHECK(g.g_x == q->grad_x_upper(e, concat(e, e)));
}

TEST_CASE("implicit_ls: indefinite curvature is flagged") {
  const ProblemPtr sine = nonconvex_sine();
  // -sin(xy) has a maximum where xy = -π/2.
  const double x = 3.0;
  const double y = -std::acos(0.0) / x;
  const HyperGradient g = implicit_ls(*sine, Vector{x}, Vector{y});
  CHECK_FALSE(g.reliable);
}

TEST_CASE("implicit_ls: non-convergence raises") {
  HypercleanOptions hc;
  hc.n_train = 20;
  hc.n_val = 20;
  const HypercleanProblem p(hc);
  const Vector x(p.upper_dim());
  const TrajectoryRecord r = pgd_forward(p, x, p.initial_parameters(2), 200, StepSchedule::constant(0.5));
  CgOptions cg;
  cg.max_iterations = 1;
  CHECK_THROWS_AS(implicit_ls(p, x, r.ys.back(), cg), IllConditioned);
}

TEST_CASE("implicit_ls matches long unrolled trajectories") {
  const ProblemPtr q = convex_quadratic(4);
  Rng rng(4);
  Vector x(4), z(8);
  for (std::size_t i = 0; i < 4; ++i) x[i] = rng.uniform(-2, 2);
  for (std::size_t i = 0; i < 8; ++i) z[i] = rng.uniform(-2, 2);
  const TrajectoryRecord r = pgd_forward(*q, x, z, 200, StepSchedule::constant(0.15));
  const HyperGradient u = unrolled_reverse(*q, r, 200);
  const HyperGradient ls = implicit_ls(*q, x, r.ys.back());
  CHECK(norm_inf(u.g_x - ls.g_x) < 1e-4);
}

TEST_CASE("implicit_ns") {
  const ProblemPtr q = convex_quadratic(3);
  const Vector x{0.5, 2.0, -1.0};
  const Vector y = concat(x, Vector{0.3, -0.2, 0.9});

  // Identity Hessian on y₁, α = 1, one term: same correction as the solve.
  const HyperGradient one = implicit_ns(*q, x, y, 1.0, 1);
  const HyperGradient ls = implicit_ls(*q, x, y);
  CHECK(close(one.g_x, ls.g_x, 1e-12));

  const HyperGradient none = implicit_ns(*q, x, y, 0.5, 0);
  CHECK(none.g_x == q->grad_x_upper(x, y));

  double previous = INFINITY;
  for (std::size_t terms : {1u, 2u, 4u, 8u, 16u, 32u, 64u}) {
    const double gap = distance(implicit_ns(*q, x, y, 0.15, terms).g_x, ls.g_x);
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK_THROWS_AS(implicit_ns(*q, x, y, 0.0, 3), InvalidArgument);
}

TEST_CASE("implicit_ns: divergence shows in the partial sums") {
  const ProblemPtr q = convex_quadratic(2);
  const Vector x{0.5, 2.0};
  const Vector y = concat(x, Vector{0.3, -0.2});
  const HyperGradient g = implicit_ns(*q, x, y, 3.0, 20);  // |1 - 3| > 1
  CHECK(g.series_norms.size() == 20);
  CHECK_FALSE(g.reliable);
}
