#include <fmt/format.h>

#include "blo/errors.hpp"
#include "blo/hypergrad.hpp"

namespace blo {

HyperGradient unrolled_reverse(const BilevelProblem& problem, const TrajectoryRecord& record,
                               std::size_t k_bar, const UnrollOptions& options) {
  if (k_bar < 1 || k_bar > record.size()) {
    throw InvalidArgument(
        fmt::format("unrolled_reverse: k_bar {} outside [1, {}]", k_bar, record.size()));
  }
  const Curvature curvature(problem, options.policy);
  const Vector& x = record.x;
  const Vector& y_bar = record.ys[k_bar];

  HyperGradient out;
  out.method = HyperMethod::unrolled;
  out.k_used = k_bar;
  out.g_x = problem.grad_x_upper(x, y_bar);

  AdjointState state;
  state.p = problem.grad_y_upper(x, y_bar);
  if (record.kind == DynamicsKind::nesterov) state.p_aux = Vector(problem.lower_dim());

  std::size_t stop = 0;
  if (options.horizon && *options.horizon < k_bar) stop = k_bar - *options.horizon;

  for (std::size_t k = k_bar; k-- > stop;) {
    AdjointStep step = adjoint_step(problem, record, k, state, curvature);
    out.g_x += step.delta_gx;
    state = std::move(step.state);
  }

  if (stop > 0) {
    out.g_z = Vector(problem.lower_dim());
    out.note = "truncated sweep; no initialization gradient";
  } else if (record.kind == DynamicsKind::nesterov) {
    out.g_z = state.p + state.p_aux;  // y_0 = u_0 = z
  } else {
    out.g_z = std::move(state.p);
  }
  out.iterations = k_bar - stop;
  return out;
}

}  // namespace blo
