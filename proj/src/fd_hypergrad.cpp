#include <fmt/format.h>

#include "blo/errors.hpp"
#include "blo/hypergrad.hpp"

namespace blo {
namespace {

struct Probe {
  double value;
  std::vector<Vector> masks;
};

Probe probe(const BilevelProblem& problem, const Vector& x, const Vector& z, std::size_t K,
            std::size_t k_bar, const DynamicsSpec& dynamics) {
  TrajectoryRecord rec = run_dynamics(problem, x, z, K, dynamics);
  return Probe{rec.upper_values[k_bar - 1], std::move(rec.masks)};
}

}  // namespace

HyperGradient fd_hypergrad(const BilevelProblem& problem, const Vector& x, const Vector& z,
                           std::size_t K, std::size_t k_bar, const DynamicsSpec& dynamics,
                           double h) {
  if (!(h > 0.0)) throw InvalidArgument("fd_hypergrad: h must be positive");
  if (k_bar < 1 || k_bar > K) {
    throw InvalidArgument(fmt::format("fd_hypergrad: k_bar {} outside [1, {}]", k_bar, K));
  }
  const std::size_t n = x.size();
  const std::size_t m = z.size();
  const Probe base = probe(problem, x, z, K, k_bar, dynamics);

  HyperGradient out;
  out.method = HyperMethod::finite_diff;
  out.k_used = k_bar;
  out.g_x = Vector(n);
  out.g_z = Vector(m);

  for (std::size_t i = 0; i < n + m; ++i) {
    Vector xp = x, xm = x, zp = z, zm = z;
    if (i < n) {
      xp[i] += h;
      xm[i] -= h;
    } else {
      zp[i - n] += h;
      zm[i - n] -= h;
    }
    const Probe plus = probe(problem, xp, zp, K, k_bar, dynamics);
    const Probe minus = probe(problem, xm, zm, K, k_bar, dynamics);
    const double d = (plus.value - minus.value) / (2.0 * h);
    (i < n ? out.g_x[i] : out.g_z[i - n]) = d;
    // The initial projection of z is not part of the recorded masks.
    const bool clipped = project(zp, problem.lower_box()) != zp || project(zm, problem.lower_box()) != zm;
    if (clipped || plus.masks != base.masks || minus.masks != base.masks) {
      out.unreliable_coords.push_back(i);
    }
  }
  out.reliable = out.unreliable_coords.empty();
  if (!out.reliable) out.note = "perturbation crossed a projection boundary";
  return out;
}

}  // namespace blo
