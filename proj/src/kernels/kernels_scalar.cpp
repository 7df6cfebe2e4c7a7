#include <cmath>

#include "blo/kernels.hpp"

namespace blo::kernels {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

// Same operand order as maxpd/minpd so the SIMD path matches on signed zeros.
void clamp(const double* p, const double* lo, const double* hi, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double t = p[i] > lo[i] ? p[i] : lo[i];
    out[i] = t < hi[i] ? t : hi[i];
  }
}

void interior_mask(const double* p, const double* lo, const double* hi, double tol,
                   double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (lo[i] + tol < p[i] && p[i] < hi[i] - tol) ? 1.0 : 0.0;
  }
}

bool all_finite(const double* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(a[i])) return false;
  }
  return true;
}

constexpr Table kScalar{"scalar", dot, axpy, multiply, clamp, interior_mask, all_finite};

}  // namespace

const Table& scalar() { return kScalar; }

}  // namespace blo::kernels
