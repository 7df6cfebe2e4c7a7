#include <cmath>

#include <fmt/format.h>

#include "blo/dynamics.hpp"
#include "blo/errors.hpp"

namespace blo {
namespace {

void check_inputs(const BilevelProblem& problem, const Vector& x, const Vector& z, std::size_t K,
                  const char* what) {
  if (K == 0) throw InvalidArgument(fmt::format("{}: K must be at least 1", what));
  if (x.size() != problem.upper_dim()) {
    throw InvalidArgument(fmt::format("{}: x has dimension {}, expected {}", what, x.size(),
                                      problem.upper_dim()));
  }
  if (z.size() != problem.lower_dim()) {
    throw InvalidArgument(fmt::format("{}: z has dimension {}, expected {}", what, z.size(),
                                      problem.lower_dim()));
  }
}

Vector checked_gradient(Vector g, std::size_t k) {
  if (!g.all_finite()) {
    throw NumericalFailure(fmt::format("non-finite lower-level gradient at inner step {}", k), k);
  }
  return g;
}

TrajectoryRecord start_record(DynamicsKind kind, const BilevelProblem& problem, const Vector& x,
                              const Vector& z, std::size_t K) {
  TrajectoryRecord rec;
  rec.kind = kind;
  rec.x = x;
  rec.ys.reserve(K + 1);
  rec.pre_projection.reserve(K);
  rec.masks.reserve(K);
  rec.upper_values.reserve(K);
  rec.steps.reserve(K);
  rec.ys.push_back(project(z, problem.lower_box()));
  return rec;
}

void push_step(TrajectoryRecord& rec, const BilevelProblem& problem, Vector w, double alpha,
               double tol) {
  const BoxSet& box = problem.lower_box();
  rec.masks.push_back(active_mask(w, box, tol));
  rec.ys.push_back(project(w, box));
  rec.pre_projection.push_back(std::move(w));
  rec.upper_values.push_back(problem.upper(rec.x, rec.ys.back()));
  rec.steps.push_back(alpha);
}

}  // namespace

double next_momentum(double t, bool paper_rule) {
  return paper_rule ? (1.0 + std::sqrt(1.0 + t * t)) / 2.0
                    : (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
}

TrajectoryRecord pgd_forward(const BilevelProblem& problem, const Vector& x, const Vector& z,
                             std::size_t K, const StepSchedule& schedule, double mask_tolerance) {
  check_inputs(problem, x, z, K, "pgd_forward");
  if (const auto L = problem.lipschitz()) schedule.check_window(*L);

  TrajectoryRecord rec = start_record(DynamicsKind::projected_gradient, problem, x, z, K);
  for (std::size_t k = 0; k < K; ++k) {
    const double alpha = schedule.at(k);
    const Vector g = checked_gradient(problem.grad_y_lower(x, rec.ys[k]), k);
    Vector w = rec.ys[k];
    axpy(-alpha, g, w);
    push_step(rec, problem, std::move(w), alpha, mask_tolerance);
  }
  return rec;
}

TrajectoryRecord nesterov_forward(const BilevelProblem& problem, const Vector& x, const Vector& z,
                                  std::size_t K, const NesterovOptions& options) {
  check_inputs(problem, x, z, K, "nesterov_forward");
  double alpha = 0.0;
  if (options.alpha) {
    alpha = *options.alpha;
  } else if (const auto L = problem.lipschitz()) {
    alpha = 1.0 / *L;
  } else {
    throw InvalidArgument("nesterov_forward: no step given and the problem has no Lipschitz constant");
  }
  if (!(alpha > 0.0)) throw InvalidArgument("nesterov_forward: step must be positive");

  TrajectoryRecord rec = start_record(DynamicsKind::nesterov, problem, x, z, K);
  rec.us.reserve(K + 1);
  rec.ts.reserve(K + 1);
  rec.us.push_back(rec.ys[0]);
  rec.ts.push_back(1.0);
  for (std::size_t k = 0; k < K; ++k) {
    const Vector& u = rec.us[k];
    const Vector g = checked_gradient(problem.grad_y_lower(x, u), k);
    Vector w = u;
    axpy(-alpha, g, w);
    push_step(rec, problem, std::move(w), alpha, options.mask_tolerance);

    const double t = rec.ts[k];
    const double t_next = next_momentum(t, options.paper_t_rule);
    const double beta = (t - 1.0) / t_next;
    Vector u_next = rec.ys[k + 1];
    axpy(beta, rec.ys[k + 1] - rec.ys[k], u_next);
    rec.us.push_back(std::move(u_next));
    rec.ts.push_back(t_next);
  }
  return rec;
}

TrajectoryRecord aggregated_forward(const BilevelProblem& problem, const Vector& x,
                                    const Vector& z, std::size_t K, const StepSchedule& schedule,
                                    double mu, double mask_tolerance) {
  check_inputs(problem, x, z, K, "aggregated_forward");
  if (!(mu >= 0.0 && mu < 1.0)) throw InvalidArgument("aggregated_forward: mu must lie in [0, 1)");

  TrajectoryRecord rec = start_record(DynamicsKind::aggregated, problem, x, z, K);
  rec.mu = mu;
  for (std::size_t k = 0; k < K; ++k) {
    const double alpha = schedule.at(k);
    Vector w = rec.ys[k];
    if (mu == 0.0) {
      // Degenerates to projected gradient descent, bit for bit.
      axpy(-alpha, checked_gradient(problem.grad_y_lower(x, rec.ys[k]), k), w);
    } else {
      Vector d = (1.0 - mu) * checked_gradient(problem.grad_y_lower(x, rec.ys[k]), k);
      axpy(mu, checked_gradient(problem.grad_y_upper(x, rec.ys[k]), k), d);
      axpy(-alpha, d, w);
    }
    push_step(rec, problem, std::move(w), alpha, mask_tolerance);
  }
  return rec;
}

TrajectoryRecord run_dynamics(const BilevelProblem& problem, const Vector& x, const Vector& z,
                              std::size_t K, const DynamicsSpec& spec) {
  switch (spec.kind) {
    case DynamicsKind::projected_gradient:
      return pgd_forward(problem, x, z, K, spec.schedule, spec.mask_tolerance);
    case DynamicsKind::nesterov:
      return nesterov_forward(problem, x, z, K,
                              NesterovOptions{spec.nesterov_alpha, spec.paper_t_rule, spec.mask_tolerance});
    case DynamicsKind::aggregated:
      return aggregated_forward(problem, x, z, K, spec.schedule, spec.mu, spec.mask_tolerance);
  }
  throw InvalidArgument("run_dynamics: unknown dynamics kind");
}

}  // namespace blo
