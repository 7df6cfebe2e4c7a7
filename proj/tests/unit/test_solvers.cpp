#include <doctest.h>

#include <cmath>
#include <vector>

#include "blo/errors.hpp"
#include "blo/solvers.hpp"

using namespace blo;

namespace {

SolverConfig small(Method m, std::size_t T, std::size_t K, double alpha) {
  SolverConfig c;
  c.method = m;
  c.T = T;
  c.K = K;
  c.inner_schedule = StepSchedule::constant(alpha);
  return c;
}

}  // namespace

TEST_CASE("ptt_select") {
  CHECK(ptt_select(std::vector<double>{1, 3, 2}) == 2);
  CHECK(ptt_select(std::vector<double>{5, 5, 5}) == 1);
  CHECK(ptt_select(std::vector<double>{0, 4, 1, 4}) == 2);
  CHECK(ptt_select(std::vector<double>{-2}) == 1);
  CHECK(ptt_select(std::vector<double>{-3, -1, -2}) == 2);
  CHECK_THROWS_AS(ptt_select(std::vector<double>{}), InvalidArgument);
}

TEST_CASE("method names round-trip") {
  for (Method m : all_methods()) CHECK(parse_method(to_string(m)) == m);
  CHECK(all_methods().size() == 8);
  CHECK(to_string(Method::iaptt_gm) == "iaptt-gm");
  CHECK_THROWS_AS(parse_method("gradient-magic"), InvalidArgument);
  CHECK(parse_outer_optimizer(to_string(OuterOptimizer::adaptive_moment)) ==
        OuterOptimizer::adaptive_moment);
}

TEST_CASE("default configurations") {
  const SolverConfig nc = SolverConfig::nonconvex_defaults();
  CHECK(nc.T == 500);
  CHECK(nc.K == 40);
  CHECK(nc.inner_schedule.at(0) == 0.0005);
  CHECK(nc.alpha_x == 0.1);
  CHECK(nc.alpha_z == 0.1);
  CHECK(nc.outer_optimizer == OuterOptimizer::projected_gd);

  const SolverConfig hc = SolverConfig::hyperclean_defaults();
  CHECK(hc.T == 3000);
  CHECK(hc.K == 50);
  CHECK(hc.inner_schedule.at(0) == 0.03);
  CHECK(hc.alpha_x == 0.01);
  CHECK(hc.outer_optimizer == OuterOptimizer::adaptive_moment);

  const SolverConfig cv = SolverConfig::convex_defaults();
  CHECK(cv.T == 1000);
  CHECK(cv.K == 20);
  CHECK(cv.inner_schedule.at(0) == 0.15);
  CHECK(cv.alpha_x == 0.005);
}

TEST_CASE("config validation") {
  SolverConfig c = SolverConfig::nonconvex_defaults();
  c.T = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = SolverConfig::nonconvex_defaults();
  c.alpha_z = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = SolverConfig::nonconvex_defaults();
  c.method = Method::bda;
  c.mu = 1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.mu = 0.0;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("one outer step of the initialization-auxiliary loop by hand") {
  const ProblemPtr q = convex_quadratic(1);
  const double a = 0.3;
  SolverConfig c = small(Method::iaptt_gm, 1, 1, a);
  c.alpha_x = 0.05;
  c.alpha_z = 0.07;
  const double x = 0.4, z1 = 1.5, z2 = 0.2;
  const RunState s = run_iaptt_gm(*q, c, Vector{x}, Vector{z1, z2});

  const double y1 = (1 - a) * z1 + a * x;
  const double d1 = y1 - 1.0, d2 = x - z2;
  const double gx = 4 * d2 * d2 * d2 + a * 4 * d1 * d1 * d1;
  const double gz1 = (1 - a) * 4 * d1 * d1 * d1;
  const double gz2 = -4 * d2 * d2 * d2;
  REQUIRE(s.logs.size() == 1);
  CHECK(s.logs[0].k_bar == 1);
  CHECK(s.logs[0].F_value == doctest::Approx(d1 * d1 * d1 * d1 + d2 * d2 * d2 * d2));
  CHECK(s.x[0] == doctest::Approx(x - 0.05 * gx).epsilon(1e-13));
  CHECK(s.z[0] == doctest::Approx(z1 - 0.07 * gz1).epsilon(1e-13));
  CHECK(s.z[1] == doctest::Approx(z2 - 0.07 * gz2).epsilon(1e-13));
  CHECK(s.logs[0].grad_norm_z == doctest::Approx(std::hypot(gz1, gz2)));
}

TEST_CASE("whole-loop fixed point") {
  const ProblemPtr q = convex_quadratic(2);
  const Vector e(2, 1.0);
  const RunState s = run_iaptt_gm(*q, small(Method::iaptt_gm, 25, 10, 0.15), e, concat(e, e));
  CHECK(s.x == e);
  CHECK(s.z == concat(e, e));
  for (const auto& log : s.logs) {
    CHECK(log.F_value == 0.0);
    CHECK(log.x_rel_err == 0.0);
  }
}

TEST_CASE("logging contract") {
  const ProblemPtr sine = nonconvex_sine();
  const RunState one = run_iaptt_gm(*sine, small(Method::iaptt_gm, 1, 40, 0.0005), Vector{1}, Vector{2});
  CHECK(one.logs.size() == 1);
  CHECK(one.t == 1);
  CHECK_FALSE(one.logs[0].wall_millis.has_value());

  SolverConfig timed = small(Method::iaptt_gm, 4, 10, 0.0005);
  timed.record_timing = true;
  const RunState s = run_iaptt_gm(*sine, timed, Vector{5}, Vector{1});
  REQUIRE(s.logs.size() == 4);
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(s.logs[t].t == t);
    REQUIRE(s.logs[t].wall_millis.has_value());
    if (t > 0) CHECK(*s.logs[t].wall_millis >= *s.logs[t - 1].wall_millis);
    CHECK(s.logs[t].x_rel_err.has_value());
    CHECK(s.logs[t].k_bar >= 1);
    CHECK(s.logs[t].k_bar <= 10);
  }
  CHECK(s.last_k_bar == s.logs.back().k_bar);
}

TEST_CASE("runs are deterministic and feasible") {
  const ProblemPtr sine = nonconvex_sine();
  for (Method m : all_methods()) {
    CAPTURE(to_string(m));
    SolverConfig c = small(m, 30, 15, 0.0005);
    const RunState a = run_solver(*sine, c, Vector{7}, Vector{-1});
    const RunState b = run_solver(*sine, c, Vector{7}, Vector{-1});
    CHECK(a.x == b.x);
    CHECK(a.z == b.z);
    REQUIRE(a.logs.size() == b.logs.size());
    for (std::size_t t = 0; t < a.logs.size(); ++t) {
      CHECK(a.logs[t].F_value == b.logs[t].F_value);
      CHECK(a.logs[t].k_bar == b.logs[t].k_bar);
    }
    CHECK(a.x[0] >= 1.0);
    CHECK(a.x[0] <= 10.0);
    CHECK(std::abs(a.z[0]) <= 2.0);
  }
}

TEST_CASE("only initialization-auxiliary methods move z") {
  const ProblemPtr sine = nonconvex_sine();
  for (Method m : {Method::rhg, Method::t_rhg, Method::bda, Method::implicit_ls, Method::implicit_ns}) {
    const RunState s = run_variant(*sine, small(m, 5, 10, 0.0005), Vector{5}, Vector{1});
    CHECK(s.z == Vector{1.0});
    for (const auto& log : s.logs) CHECK(log.grad_norm_z == 0.0);
  }
  const RunState moved = run_variant(*sine, small(Method::ia_gm, 5, 10, 0.0005), Vector{5}, Vector{1});
  CHECK_FALSE(moved.z == Vector{1.0});
}

TEST_CASE("degenerate variants coincide") {
  const ProblemPtr sine = nonconvex_sine();
  const Vector x0{3}, z0{0.5};

  SolverConfig rhg = small(Method::rhg, 20, 12, 0.0005);
  SolverConfig bda = rhg;
  bda.method = Method::bda;
  bda.mu = 0.0;
  SolverConfig trhg = rhg;
  trhg.method = Method::t_rhg;
  trhg.truncate_at = 12;

  const RunState a = run_variant(*sine, rhg, x0, z0);
  const RunState b = run_variant(*sine, bda, x0, z0);
  const RunState c = run_variant(*sine, trhg, x0, z0);
  CHECK(a.x == b.x);
  CHECK(a.x == c.x);
  for (std::size_t t = 0; t < a.logs.size(); ++t) {
    CHECK(a.logs[t].F_value == b.logs[t].F_value);
    CHECK(a.logs[t].F_value == c.logs[t].F_value);
  }
}

TEST_CASE("dynamics per method") {
  SolverConfig c = SolverConfig::nonconvex_defaults();
  c.method = Method::ia_gm_a;
  CHECK(dynamics_for(c).kind == DynamicsKind::nesterov);
  c.method = Method::bda;
  CHECK(dynamics_for(c).kind == DynamicsKind::aggregated);
  CHECK(dynamics_for(c).mu == 0.4);
  c.method = Method::rhg;
  CHECK(dynamics_for(c).kind == DynamicsKind::projected_gradient);
}

TEST_CASE("average_k_bar") {
  RunState s;
  s.method = Method::iaptt_gm;
  for (std::size_t k : {3u, 5u, 10u}) {
    IterateLog log;
    log.k_bar = k;
    s.logs.push_back(log);
  }
  CHECK(average_k_bar(s) == 6.0);
  s.method = Method::rhg;
  CHECK_THROWS_AS(average_k_bar(s), InvalidArgument);
  RunState empty;
  CHECK_THROWS_AS(average_k_bar(empty), InvalidArgument);
}

TEST_CASE("entry points check the method") {
  const ProblemPtr sine = nonconvex_sine();
  CHECK_THROWS_AS(run_iaptt_gm(*sine, small(Method::rhg, 1, 1, 0.0005), Vector{1}, Vector{0}),
                  InvalidArgument);
  CHECK_THROWS_AS(run_variant(*sine, small(Method::iaptt_gm, 1, 1, 0.0005), Vector{1}, Vector{0}),
                  InvalidArgument);
  CHECK_THROWS_AS(run_solver(*sine, small(Method::rhg, 1, 1, 0.0005), Vector{1, 2}, Vector{0}),
                  InvalidArgument);
}

TEST_CASE("convex quadratic: the outer loop reduces F") {
  const ProblemPtr q = convex_quadratic(5);
  SolverConfig c = SolverConfig::convex_defaults();
  c.T = 200;
  const Vector x0(5, 0.0);
  const Vector z0(10, 0.5);
  const RunState s = run_iaptt_gm(*q, c, x0, z0);
  CHECK(s.logs.back().F_value < s.logs.front().F_value);
  CHECK(*s.logs.back().x_rel_err < *s.logs.front().x_rel_err);
}
