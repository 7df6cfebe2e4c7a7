#pragma once

// Dense double-precision kernels with a scalar reference and SIMD variants.
// The active table is chosen once at first use from CPUID; setting the
// environment variable BLO_SIMD=scalar forces the reference path.
//
// Element-wise kernels (axpy, clamp, masks, products) are bit-identical across
// variants. Reductions (dot) reassociate and agree to a few ulps only.

#include <cstddef>
#include <string_view>

namespace blo::kernels {

struct Table {
  std::string_view name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// out[i] = a[i] * b[i]
  void (*multiply)(const double* a, const double* b, double* out, std::size_t n);
  /// out[i] = min(max(p[i], lo[i]), hi[i])
  void (*clamp)(const double* p, const double* lo, const double* hi, double* out,
                std::size_t n);
  /// out[i] = 1 if lo[i] + tol < p[i] < hi[i] - tol else 0
  void (*interior_mask)(const double* p, const double* lo, const double* hi, double tol,
                        double* out, std::size_t n);
  bool (*all_finite)(const double* a, std::size_t n);
};

const Table& scalar();

/// nullptr when the variant was not compiled in or the CPU lacks support.
const Table* avx2();

const Table& active();

/// Override the runtime choice. Intended for tests and benchmarking.
void use(const Table& table);

}  // namespace blo::kernels
