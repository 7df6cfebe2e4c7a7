#include "blo/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "blo/errors.hpp"
#include "blo/hypergrad.hpp"
#include "blo/parallel.hpp"
#include "blo/residual.hpp"
#include "blo/rng.hpp"
#include "blo/solvers.hpp"

namespace blo {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSineY = 2.0;
// Enumerated points within this distance of ±2 are snapped onto the bound.
constexpr double kSnap = 1e-12;

void check_sine_x(double x, const char* what) {
  if (!(x >= 1.0 && x <= 10.0)) {
    throw InvalidArgument(fmt::format("{}: x = {} outside X = [1, 10]", what, x));
  }
}

// All (offset + period * k) / x inside [-2, 2], snapped at the bounds.
std::vector<double> enumerate_lattice(double x, double offset, double period) {
  std::vector<double> out;
  const auto k_lo = static_cast<long>(std::floor((-kSineY * x - offset) / period)) - 1;
  const auto k_hi = static_cast<long>(std::ceil((kSineY * x - offset) / period)) + 1;
  for (long k = k_lo; k <= k_hi; ++k) {
    double y = (offset + period * static_cast<double>(k)) / x;
    if (std::abs(y + kSineY) <= kSnap) y = -kSineY;
    if (std::abs(y - kSineY) <= kSnap) y = kSineY;
    if (y >= -kSineY && y <= kSineY) out.push_back(y);
  }
  return out;
}

bool is_sine(const BilevelProblem& problem) {
  return problem.name() == "nonconvex-sine" && problem.upper_dim() == 1 && problem.lower_dim() == 1;
}

}  // namespace

std::vector<double> sine_global_minimizers(double x) {
  check_sine_x(x, "sine_global_minimizers");
  return enumerate_lattice(x, kPi / 2.0, 2.0 * kPi);
}

std::vector<double> sine_stationary_points(double x) {
  check_sine_x(x, "sine_stationary_points");
  std::vector<double> out = enumerate_lattice(x, kPi / 2.0, kPi);
  // ∇_y f = -x cos(x y): -2 is stationary when the gradient does not point
  // into the box (∇_y f(-2) >= 0), +2 when ∇_y f(2) <= 0.
  if (-x * std::cos(-kSineY * x) >= 0.0) out.push_back(-kSineY);
  if (-x * std::cos(kSineY * x) <= 0.0) out.push_back(kSineY);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double phi_oracle_sine(double x, std::size_t /*grid_points*/) {
  check_sine_x(x, "phi_oracle_sine");
  const std::vector<double> ys = sine_global_minimizers(x);
  double best = std::numeric_limits<double>::infinity();
  for (double y : ys) best = std::min(best, x + x * y);
  return best;
}

RateCheckReport rate_check(const BilevelProblem& problem, const std::vector<std::size_t>& K_grid,
                           std::size_t sample_count, const StepSchedule& schedule,
                           std::uint64_t seed) {
  if (!problem.upper_box().bounded() || !problem.lower_box().bounded()) {
    throw UnsupportedProblem(problem.name() + ": rate check needs compact X and Y");
  }
  const auto L = problem.lipschitz();
  if (!L) throw UnsupportedProblem(problem.name() + ": rate check needs a Lipschitz constant");
  schedule.check_window(*L);
  if (K_grid.empty() || !std::is_sorted(K_grid.begin(), K_grid.end()) ||
      std::adjacent_find(K_grid.begin(), K_grid.end()) != K_grid.end() || K_grid.front() == 0) {
    throw InvalidArgument("rate_check: K grid must be strictly increasing and positive");
  }
  if (sample_count == 0) throw InvalidArgument("rate_check: need at least one sample");

  RateCheckReport report;
  report.K_grid = K_grid;
  report.samples = sample_count;
  report.alpha_lo = schedule.lo();
  report.alpha_hi = schedule.hi();

  const BoxSet& X = problem.upper_box();
  const BoxSet& Y = problem.lower_box();
  auto draw = [](Rng& rng, const BoxSet& box) {
    Vector v(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) v[i] = rng.uniform(box.lower()[i], box.upper()[i]);
    return v;
  };

  if (const auto range = problem.lower_value_range()) {
    report.f_min = range->min;
    report.f_max = range->max;
  } else {
    Rng rng(split_seed(seed, 1));
    report.f_min = std::numeric_limits<double>::infinity();
    report.f_max = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 10000; ++i) {
      const double f = problem.lower(draw(rng, X), draw(rng, Y));
      report.f_min = std::min(report.f_min, f);
      report.f_max = std::max(report.f_max, f);
    }
  }
  report.analytic_bound =
      std::sqrt((report.f_max - report.f_min) / (1.0 / report.alpha_hi - *L / 2.0));

  std::vector<Vector> xs;
  std::vector<Vector> zs;
  Rng rng(seed);
  for (std::size_t s = 0; s < sample_count; ++s) {
    xs.push_back(draw(rng, X));
    zs.push_back(draw(rng, Y));
  }

  const std::size_t K_max = K_grid.back();
  std::vector<std::vector<double>> per_sample(sample_count, std::vector<double>(K_grid.size()));
  parallel_for(sample_count, [&](std::size_t s) {
    const TrajectoryRecord rec = pgd_forward(problem, xs[s], zs[s], K_max, schedule);
    double best = std::numeric_limits<double>::infinity();
    std::size_t next = 0;
    for (std::size_t k = 0; k <= K_max; ++k) {
      best = std::min(best, residual(problem, xs[s], rec.ys[k], report.alpha_lo).norm);
      if (k == K_grid[next]) per_sample[s][next++] = best;
    }
  });

  report.worst_min_residual.assign(K_grid.size(), 0.0);
  for (std::size_t i = 0; i < K_grid.size(); ++i) {
    for (std::size_t s = 0; s < sample_count; ++s) {
      report.worst_min_residual[i] = std::max(report.worst_min_residual[i], per_sample[s][i]);
    }
    report.fitted_constant =
        std::max(report.fitted_constant,
                 report.worst_min_residual[i] * std::sqrt(static_cast<double>(K_grid[i]) + 1.0));
  }
  return report;
}

PhiReport phi_gap_check(const BilevelProblem& problem, const std::vector<std::size_t>& K_grid,
                        std::size_t x_grid_points, std::size_t z_grid_points,
                        const PhiGapOptions& options) {
  if (!is_sine(problem)) {
    throw UnsupportedProblem(problem.name() + ": no exact value-function oracle");
  }
  if (x_grid_points < 100 || z_grid_points < 100) {
    throw InvalidArgument("phi_gap_check: grids need at least 100 points per axis");
  }
  if (K_grid.empty() || !std::is_sorted(K_grid.begin(), K_grid.end()) || K_grid.front() == 0) {
    throw InvalidArgument("phi_gap_check: K grid must be increasing and positive");
  }

  const double x_lo = problem.upper_box().lower()[0];
  const double x_hi = problem.upper_box().upper()[0];
  const double z_lo = problem.lower_box().lower()[0];
  const double z_hi = problem.lower_box().upper()[0];
  auto grid_x = [&](std::size_t i) {
    return x_lo + (x_hi - x_lo) * static_cast<double>(i) / static_cast<double>(x_grid_points - 1);
  };
  auto grid_z = [&](std::size_t j) {
    return z_lo + (z_hi - z_lo) * static_cast<double>(j) / static_cast<double>(z_grid_points - 1);
  };

  PhiReport report;
  report.K_grid = K_grid;

  // Exact inf φ: φ is piecewise linear with its infimum at grid points or at
  // the breakpoints where a minimizer (2kπ + π/2)/x touches ±2.
  std::vector<double> candidates;
  for (std::size_t i = 0; i < 20 * x_grid_points; ++i) {
    candidates.push_back(x_lo + (x_hi - x_lo) * static_cast<double>(i) /
                                    static_cast<double>(20 * x_grid_points - 1));
  }
  for (long k = -10; k <= 10; ++k) {
    const double xb = std::abs(kPi / 2.0 + 2.0 * kPi * static_cast<double>(k)) / kSineY;
    if (xb >= x_lo && xb <= x_hi) candidates.push_back(xb);
  }
  report.phi_true_min = std::numeric_limits<double>::infinity();
  for (double x : candidates) {
    const double v = phi_oracle_sine(x);
    if (v < report.phi_true_min) {
      report.phi_true_min = v;
      report.phi_true_argmin = x;
    }
  }

  report.shat_grid_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x_grid_points; ++i) {
    const double x = grid_x(i);
    for (double y : sine_stationary_points(x)) {
      report.shat_grid_min = std::min(report.shat_grid_min, x + x * y);
    }
  }

  // Prefix maxima of F along each cell's trajectory give φ_K for every K at once.
  const std::size_t nK = K_grid.size();
  const std::size_t K_max = K_grid.back();
  std::vector<double> phi(x_grid_points * z_grid_points * nK);
  parallel_for(
      x_grid_points,
      [&](std::size_t i) {
        const Vector x{grid_x(i)};
        for (std::size_t j = 0; j < z_grid_points; ++j) {
          const TrajectoryRecord rec =
              pgd_forward(problem, x, Vector{grid_z(j)}, K_max, options.schedule);
          double running = -std::numeric_limits<double>::infinity();
          std::size_t next = 0;
          for (std::size_t k = 1; k <= K_max && next < nK; ++k) {
            running = std::max(running, rec.upper_values[k - 1]);
            while (next < nK && K_grid[next] == k) {
              phi[(i * z_grid_points + j) * nK + next++] = running;
            }
          }
        }
      },
      options.workers);

  report.phi_K_min.resize(nK);
  report.argmin_x.resize(nK);
  report.argmin_z.resize(nK);
  report.gap.resize(nK);
  for (std::size_t q = 0; q < nK; ++q) {
    const std::size_t K = K_grid[q];
    std::size_t best = 0;
    for (std::size_t c = 1; c < x_grid_points * z_grid_points; ++c) {
      if (phi[c * nK + q] < phi[best * nK + q]) best = c;
    }
    Vector x{grid_x(best / z_grid_points)};
    Vector z{grid_z(best % z_grid_points)};
    double value = phi[best * nK + q];

    // Polish: projected gradient on φ_K with a backtracking step.
    double step = 0.05;
    for (std::size_t it = 0; it < options.polish_steps && step > 1e-12; ++it) {
      const TrajectoryRecord rec = pgd_forward(problem, x, z, K, options.schedule);
      const std::size_t k_bar = ptt_select(rec.upper_values);
      const HyperGradient g = unrolled_reverse(problem, rec, k_bar);
      bool accepted = false;
      while (step > 1e-12) {
        Vector xn = x;
        Vector zn = z;
        axpy(-step, g.g_x, xn);
        axpy(-step, g.g_z, zn);
        xn = project(xn, problem.upper_box());
        zn = project(zn, problem.lower_box());
        const TrajectoryRecord trial = pgd_forward(problem, xn, zn, K, options.schedule);
        const double v = *std::max_element(trial.upper_values.begin(), trial.upper_values.end());
        if (v < value) {
          x = std::move(xn);
          z = std::move(zn);
          value = v;
          accepted = true;
          step *= 1.5;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
    }
    report.phi_K_min[q] = value;
    report.argmin_x[q] = x[0];
    report.argmin_z[q] = z[0];
    report.gap[q] = report.phi_true_min - value;
  }
  return report;
}

double loglog_slope(const std::vector<std::size_t>& K_grid, const std::vector<double>& values) {
  if (K_grid.size() != values.size() || K_grid.size() < 2) {
    throw InvalidArgument("loglog_slope: need at least two matching points");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto n = static_cast<double>(K_grid.size());
  for (std::size_t i = 0; i < K_grid.size(); ++i) {
    if (!(values[i] > 0.0)) throw InvalidArgument("loglog_slope: values must be positive");
    const double lx = std::log(static_cast<double>(K_grid[i]) + 1.0);
    const double ly = std::log(values[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

DecayReport lower_gap_decay(const BilevelProblem& problem, const std::vector<std::size_t>& K_grid,
                            std::size_t sample_count, const DynamicsSpec& dynamics,
                            std::uint64_t seed, double radius) {
  if (!problem.lower_optimal_value(Vector(problem.upper_dim()))) {
    throw UnsupportedProblem(problem.name() + ": no closed-form lower-level optimum");
  }
  if (K_grid.empty() || sample_count == 0) throw InvalidArgument("lower_gap_decay: empty grid");
  auto draw = [radius](Rng& rng, const BoxSet& box) {
    Vector v(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) {
      v[i] = rng.uniform(std::max(box.lower()[i], -radius), std::min(box.upper()[i], radius));
    }
    return v;
  };
  Rng rng(seed);
  std::vector<Vector> xs;
  std::vector<Vector> zs;
  for (std::size_t s = 0; s < sample_count; ++s) {
    xs.push_back(draw(rng, problem.upper_box()));
    zs.push_back(draw(rng, problem.lower_box()));
  }

  DecayReport report;
  report.K_grid = K_grid;
  report.worst_gap.assign(K_grid.size(), 0.0);
  std::vector<std::vector<double>> per_sample(sample_count, std::vector<double>(K_grid.size()));
  parallel_for(sample_count, [&](std::size_t s) {
    for (std::size_t i = 0; i < K_grid.size(); ++i) {
      const TrajectoryRecord rec = run_dynamics(problem, xs[s], zs[s], K_grid[i], dynamics);
      per_sample[s][i] = *problem.lower_suboptimality(xs[s], rec.ys.back());
    }
  });
  for (std::size_t i = 0; i < K_grid.size(); ++i) {
    for (std::size_t s = 0; s < sample_count; ++s) {
      report.worst_gap[i] = std::max(report.worst_gap[i], per_sample[s][i]);
    }
  }
  report.slope = loglog_slope(K_grid, report.worst_gap);
  return report;
}

FixedPointReport fixed_point_suite(std::size_t count, std::size_t K, std::uint64_t seed) {
  FixedPointReport report;
  Rng rng(seed);
  const ProblemPtr sine = nonconvex_sine();
  const ProblemPtr quad = convex_quadratic(3);
  const StepSchedule sine_steps = StepSchedule::constant(0.0005);

  auto track = [&](const BilevelProblem& p, const Vector& x, const Vector& z, double alpha) {
    const TrajectoryRecord g = pgd_forward(p, x, z, K, StepSchedule::constant(alpha));
    const TrajectoryRecord a = nesterov_forward(p, x, z, K, NesterovOptions{alpha, false});
    for (const auto* rec : {&g, &a}) {
      for (const Vector& y : rec->ys) report.max_drift = std::max(report.max_drift, distance(y, z));
      for (const Vector& u : rec->us) report.max_drift = std::max(report.max_drift, distance(u, z));
    }
    report.max_residual = std::max(report.max_residual, residual(p, x, z, alpha).norm);
    ++report.cases;
  };

  for (std::size_t c = 0; c < count; ++c) {
    if (c % 2 == 0) {
      const double x = rng.uniform(1.0, 10.0);
      const std::vector<double> ys = sine_global_minimizers(x);
      const double y = ys[rng.index(ys.size())];
      track(*sine, Vector{x}, Vector{y}, sine_steps.at(0));
    } else {
      Vector x(3);
      Vector z(6);
      for (std::size_t i = 0; i < 3; ++i) {
        x[i] = rng.uniform(-5.0, 5.0);
        z[i] = x[i];
        z[3 + i] = rng.uniform(-5.0, 5.0);
      }
      track(*quad, x, z, 0.15);
    }
  }
  return report;
}

LocalProbe local_minimum_probe_sine(double x, double y, double alpha, double delta,
                                    std::size_t grid) {
  check_sine_x(x, "local_minimum_probe_sine");
  const ProblemPtr sine = nonconvex_sine();
  LocalProbe probe;
  probe.value = x + x * y;
  probe.residual = residual(*sine, Vector{x}, Vector{y}, alpha).norm;
  probe.best_neighbor = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid; ++i) {
    const double xp = std::clamp(x - delta + 2.0 * delta * static_cast<double>(i) /
                                                 static_cast<double>(grid - 1),
                                 1.0, 10.0);
    for (double yp : sine_stationary_points(xp)) {
      if (std::abs(yp - y) <= delta) probe.best_neighbor = std::min(probe.best_neighbor, xp + xp * yp);
    }
  }
  probe.improvable = probe.best_neighbor < probe.value - 1e-9;
  return probe;
}

}  // namespace blo

namespace blo {
namespace {

bool all_interior(const TrajectoryRecord& rec) {
  for (const Vector& m : rec.masks) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] != 1.0) return false;
    }
  }
  return true;
}

}  // namespace

HypergradSuiteReport hypergrad_oracle_suite(std::size_t count, std::uint64_t seed, double rtol,
                                            double atol) {
  HypergradSuiteReport report;
  Rng rng(seed);
  const ProblemPtr sine = nonconvex_sine();

  while (report.configurations < count) {
    const bool on_sine = report.configurations % 2 == 0;
    const bool accelerated = (report.configurations / 2) % 2 == 1;
    const std::size_t K = 1 + rng.index(20);
    ProblemPtr problem = sine;
    Vector x;
    Vector z;
    double alpha = 0.0;
    if (on_sine) {
      x = Vector{rng.uniform(1.5, 9.5)};
      z = Vector{rng.uniform(-1.5, 1.5)};
      alpha = rng.uniform(0.001, 0.015);
    } else {
      const std::size_t n = 1 + rng.index(5);
      problem = convex_quadratic(n);
      x = Vector(n);
      z = Vector(2 * n);
      for (std::size_t i = 0; i < n; ++i) x[i] = rng.uniform(-2.0, 2.0);
      for (std::size_t i = 0; i < 2 * n; ++i) z[i] = rng.uniform(-2.0, 2.0);
      alpha = rng.uniform(0.05, 0.5);
    }

    DynamicsSpec spec;
    spec.schedule = StepSchedule::constant(alpha);
    if (accelerated) {
      spec.kind = DynamicsKind::nesterov;
      spec.nesterov_alpha = alpha;
    }
    const TrajectoryRecord rec = run_dynamics(*problem, x, z, K, spec);
    if (!all_interior(rec)) continue;
    const std::size_t k_bar = ptt_select(rec.upper_values);

    const HyperGradient g = unrolled_reverse(*problem, rec, k_bar);
    const HyperGradient fd = fd_hypergrad(*problem, x, z, K, k_bar, spec);
    const Vector a = concat(g.g_x, g.g_z);
    const Vector b = concat(fd.g_x, fd.g_z);
    const double err = distance(a, b);
    const double ref = norm(b);
    report.worst_relative_error = std::max(report.worst_relative_error, err / std::max(ref, 1e-300));
    if (err > rtol * ref + atol) ++report.failures;
    ++report.configurations;
  }

  const ProblemPtr quad = convex_quadratic(3);
  Vector x(3);
  Vector z(6);
  for (std::size_t i = 0; i < 3; ++i) x[i] = rng.uniform(-2.0, 2.0);
  for (std::size_t i = 0; i < 6; ++i) z[i] = rng.uniform(-2.0, 2.0);
  const std::size_t K = 200;
  const TrajectoryRecord rec = pgd_forward(*quad, x, z, K, StepSchedule::constant(0.15));
  const HyperGradient unrolled = unrolled_reverse(*quad, rec, K);
  const HyperGradient implicit = implicit_ls(*quad, x, rec.ys.back());
  report.implicit_gap = norm_inf(unrolled.g_x - implicit.g_x);
  return report;
}

}  // namespace blo
