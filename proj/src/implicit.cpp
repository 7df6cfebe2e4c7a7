#include <cmath>

#include <fmt/format.h>

#include "blo/errors.hpp"
#include "blo/hypergrad.hpp"
#include "blo/residual.hpp"

namespace blo {
namespace {

HyperGradient finish(const BilevelProblem& problem, const Curvature& curvature, const Vector& x,
                     const Vector& y_star, const Vector& v, HyperMethod method) {
  HyperGradient out;
  out.method = method;
  out.g_x = problem.grad_x_upper(x, y_star);
  out.g_x -= curvature.lower_xy(x, y_star, v);
  out.g_z = Vector(problem.lower_dim());
  return out;
}

void flag_stationarity(HyperGradient& out, const BilevelProblem& problem, const Vector& x,
                       const Vector& y_star, double tol) {
  const double r = residual(problem, x, y_star, 1.0).norm;
  if (r > tol) {
    out.reliable = false;
    out.note = fmt::format("y* is not stationary (residual {:.3g})", r);
  }
}

}  // namespace

HyperGradient implicit_ls(const BilevelProblem& problem, const Vector& x, const Vector& y_star,
                          const CgOptions& options, const HvpPolicy& policy) {
  const Curvature curvature(problem, policy);
  const std::size_t m = problem.lower_dim();
  const std::size_t max_iter = options.max_iterations == 0 ? 10 * m : options.max_iterations;
  auto H = [&](const Vector& v) { return curvature.lower_yy(x, y_star, v); };

  const Vector b = problem.grad_y_upper(x, y_star);
  Vector v(m);
  std::size_t iterations = 0;
  bool indefinite = false;

  // CG on Hᵀ H v = Hᵀ b (H symmetric). Iterates stay in range(H), so a
  // singular but consistent-in-range system converges to H⁺ b.
  if (norm(b) > 0.0) {
    Vector r = H(b);
    const double c_norm = norm(r);
    if (c_norm > 0.0) {
      Vector p = r;
      double rr = dot(r, r);
      bool converged = false;
      while (iterations < max_iter) {
        const Vector Hp = H(p);
        const double curv = dot(p, Hp);
        if (curv < -1e-10 * norm(p) * norm(Hp)) indefinite = true;
        const double denom = dot(Hp, Hp);
        if (denom == 0.0) break;
        const Vector HHp = H(Hp);
        const double a = rr / denom;
        axpy(a, p, v);
        axpy(-a, HHp, r);
        ++iterations;
        const double rr_new = dot(r, r);
        if (std::sqrt(rr_new) <= options.tol * c_norm) {
          converged = true;
          break;
        }
        p *= rr_new / rr;
        p += r;
        rr = rr_new;
      }
      if (!converged) {
        throw IllConditioned(
            fmt::format("implicit_ls: CG did not reach tolerance {} in {} iterations", options.tol,
                        iterations),
            iterations);
      }
    }
  }

  HyperGradient out = finish(problem, curvature, x, y_star, v, HyperMethod::implicit_ls);
  out.k_used = 0;
  out.iterations = iterations;
  flag_stationarity(out, problem, x, y_star, options.stationarity_tol);
  if (indefinite) {
    out.reliable = false;
    out.note = "lower-level Hessian is not positive definite at y*";
  }
  return out;
}

HyperGradient implicit_ns(const BilevelProblem& problem, const Vector& x, const Vector& y_star,
                          double alpha, std::size_t terms, const HvpPolicy& policy) {
  if (!(alpha > 0.0)) throw InvalidArgument("implicit_ns: alpha must be positive");
  const Curvature curvature(problem, policy);
  const std::size_t m = problem.lower_dim();

  Vector v(m);
  std::vector<double> partial;
  partial.reserve(terms);
  if (terms > 0) {
    Vector term = problem.grad_y_upper(x, y_star);
    axpy(alpha, term, v);
    partial.push_back(norm(v));
    for (std::size_t i = 1; i < terms; ++i) {
      axpy(-alpha, curvature.lower_yy(x, y_star, term), term);
      axpy(alpha, term, v);
      partial.push_back(norm(v));
    }
  }

  HyperGradient out = finish(problem, curvature, x, y_star, v, HyperMethod::implicit_ns);
  out.iterations = terms;
  out.series_norms = std::move(partial);
  const auto& s = out.series_norms;
  if (s.size() >= 3 && s.back() > 2.0 * s[s.size() / 2] && s[s.size() / 2] > 0.0) {
    out.reliable = false;
    out.note = "Neumann partial sums are growing";
  }
  return out;
}

}  // namespace blo
