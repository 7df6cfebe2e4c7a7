#include <array>

#include <fmt/format.h>

#include "blo/errors.hpp"
#include "blo/solvers.hpp"

namespace blo {
namespace {

struct MethodName {
  Method method;
  std::string_view name;
};

constexpr std::array<MethodName, 8> kMethodNames{{
    {Method::iaptt_gm, "iaptt-gm"},
    {Method::ia_gm, "ia-gm"},
    {Method::ia_gm_a, "ia-gm-a"},
    {Method::rhg, "rhg"},
    {Method::t_rhg, "t-rhg"},
    {Method::bda, "bda"},
    {Method::implicit_ls, "implicit-ls"},
    {Method::implicit_ns, "implicit-ns"},
}};

constexpr std::array<Method, 8> kAllMethods{Method::iaptt_gm, Method::ia_gm,      Method::ia_gm_a,
                                            Method::rhg,      Method::t_rhg,      Method::bda,
                                            Method::implicit_ls, Method::implicit_ns};

}  // namespace

std::string_view to_string(Method m) {
  for (const auto& [method, name] : kMethodNames) {
    if (method == m) return name;
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (const auto& [method, n] : kMethodNames) {
    if (n == name) return method;
  }
  throw InvalidArgument(fmt::format("unknown method '{}'", name));
}

std::span<const Method> all_methods() { return kAllMethods; }

std::string_view to_string(OuterOptimizer o) {
  return o == OuterOptimizer::projected_gd ? "projected-gd" : "adaptive-moment";
}

OuterOptimizer parse_outer_optimizer(std::string_view name) {
  if (name == "projected-gd") return OuterOptimizer::projected_gd;
  if (name == "adaptive-moment") return OuterOptimizer::adaptive_moment;
  throw InvalidArgument(fmt::format("unknown outer optimizer '{}'", name));
}

void SolverConfig::validate() const {
  if (T < 1) throw InvalidArgument("SolverConfig: T must be at least 1");
  if (K < 1) throw InvalidArgument("SolverConfig: K must be at least 1");
  if (!(alpha_x > 0.0) || !(alpha_z > 0.0)) {
    throw InvalidArgument("SolverConfig: outer steps alpha_x and alpha_z must be positive");
  }
  // mu = 0 is accepted as the degenerate aggregation (plain projected GD).
  if (method == Method::bda && !(mu >= 0.0 && mu < 1.0)) {
    throw InvalidArgument("SolverConfig: mu must lie in [0, 1)");
  }
  if (method == Method::t_rhg && truncate_at && *truncate_at == 0) {
    throw InvalidArgument("SolverConfig: truncate_at must be positive");
  }
}

SolverConfig SolverConfig::nonconvex_defaults() {
  SolverConfig c;
  c.T = 500;
  c.K = 40;
  c.inner_schedule = StepSchedule::constant(0.0005);
  c.alpha_x = 0.1;
  c.alpha_z = 0.1;
  c.mu = 0.4;
  c.implicit_iterations = 40;
  return c;
}

SolverConfig SolverConfig::hyperclean_defaults() {
  SolverConfig c;
  c.T = 3000;
  c.K = 50;
  c.inner_schedule = StepSchedule::constant(0.03);
  c.alpha_x = 0.01;
  c.alpha_z = 0.01;
  c.mu = 0.4;
  c.implicit_iterations = 50;
  c.outer_optimizer = OuterOptimizer::adaptive_moment;
  return c;
}

SolverConfig SolverConfig::convex_defaults() {
  SolverConfig c;
  c.T = 1000;
  c.K = 20;
  c.inner_schedule = StepSchedule::constant(0.15);
  c.alpha_x = 0.005;
  c.alpha_z = 0.005;
  c.nesterov_alpha = 0.15;
  return c;
}

}  // namespace blo
