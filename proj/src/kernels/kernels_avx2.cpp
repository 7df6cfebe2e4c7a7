#include <immintrin.h>

#include <cmath>

#include "blo/kernels.hpp"

namespace blo::kernels {
namespace avx2_impl {

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1,
                         _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc0);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void clamp(const double* p, const double* lo, const double* hi, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_max_pd(_mm256_loadu_pd(p + i), _mm256_loadu_pd(lo + i));
    _mm256_storeu_pd(out + i, _mm256_min_pd(t, _mm256_loadu_pd(hi + i)));
  }
  for (; i < n; ++i) {
    const double t = p[i] > lo[i] ? p[i] : lo[i];
    out[i] = t < hi[i] ? t : hi[i];
  }
}

void interior_mask(const double* p, const double* lo, const double* hi, double tol,
                   double* out, std::size_t n) {
  const __m256d vtol = _mm256_set1_pd(tol);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vp = _mm256_loadu_pd(p + i);
    const __m256d above = _mm256_cmp_pd(_mm256_add_pd(_mm256_loadu_pd(lo + i), vtol), vp, _CMP_LT_OQ);
    const __m256d below = _mm256_cmp_pd(vp, _mm256_sub_pd(_mm256_loadu_pd(hi + i), vtol), _CMP_LT_OQ);
    _mm256_storeu_pd(out + i, _mm256_and_pd(_mm256_and_pd(above, below), one));
  }
  for (; i < n; ++i) {
    out[i] = (lo[i] + tol < p[i] && p[i] < hi[i] - tol) ? 1.0 : 0.0;
  }
}

bool all_finite(const double* a, std::size_t n) {
  // x - x is NaN exactly when x is NaN or infinite.
  __m256d bad = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(a + i);
    bad = _mm256_or_pd(bad, _mm256_cmp_pd(_mm256_sub_pd(v, v), _mm256_sub_pd(v, v), _CMP_UNORD_Q));
  }
  if (_mm256_movemask_pd(bad) != 0) return false;
  for (; i < n; ++i) {
    if (!std::isfinite(a[i])) return false;
  }
  return true;
}

}  // namespace avx2_impl

const Table& avx2_table() {
  static constexpr Table kAvx2{"avx2",
                               avx2_impl::dot,
                               avx2_impl::axpy,
                               avx2_impl::multiply,
                               avx2_impl::clamp,
                               avx2_impl::interior_mask,
                               avx2_impl::all_finite};
  return kAvx2;
}

}  // namespace blo::kernels
