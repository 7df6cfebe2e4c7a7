#include <fmt/format.h>

#include "blo/dynamics.hpp"
#include "blo/errors.hpp"

namespace blo {
namespace {

bool all_zero(const Vector& v) {
  for (double e : v) {
    if (e != 0.0) return false;
  }
  return true;
}

}  // namespace

AdjointStep adjoint_step(const BilevelProblem& problem, const TrajectoryRecord& record,
                         std::size_t k, const AdjointState& incoming, const Curvature& curvature) {
  if (k >= record.size()) {
    throw InvalidArgument(fmt::format("adjoint_step: step {} outside a record of {} steps", k,
                                      record.size()));
  }
  const Vector& x = record.x;
  const double alpha = record.steps[k];
  const std::size_t m = problem.lower_dim();

  // Adjoint arriving at the projection output y_{k+1}.
  Vector through = incoming.p;
  double beta = 0.0;
  if (record.kind == DynamicsKind::nesterov) {
    if (incoming.p_aux.size() != m) throw InvalidArgument("adjoint_step: missing momentum adjoint");
    beta = (record.ts[k] - 1.0) / record.ts[k + 1];
    axpy(1.0 + beta, incoming.p_aux, through);
  }
  const Vector q = hadamard(record.masks[k], through);
  // Point where the gradient step was evaluated.
  const Vector& base = record.kind == DynamicsKind::nesterov ? record.us[k] : record.ys[k];

  AdjointStep out;
  out.delta_gx = Vector(problem.upper_dim());
  Vector back = q;
  if (alpha != 0.0 && !all_zero(q)) {
    if (record.kind == DynamicsKind::aggregated && record.mu != 0.0) {
      const double mu = record.mu;
      Vector hq = (1.0 - mu) * curvature.lower_yy(x, base, q);
      axpy(mu, curvature.upper_yy(x, base, q), hq);
      Vector xq = (1.0 - mu) * curvature.lower_xy(x, base, q);
      axpy(mu, curvature.upper_xy(x, base, q), xq);
      axpy(-alpha, hq, back);
      axpy(-alpha, xq, out.delta_gx);
    } else {
      axpy(-alpha, curvature.lower_yy(x, base, q), back);
      axpy(-alpha, curvature.lower_xy(x, base, q), out.delta_gx);
    }
  }

  if (record.kind == DynamicsKind::nesterov) {
    out.state.p = (-beta) * incoming.p_aux;
    out.state.p_aux = std::move(back);
  } else {
    out.state.p = std::move(back);
  }
  return out;
}

}  // namespace blo
