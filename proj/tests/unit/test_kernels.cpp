#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "blo/kernels.hpp"
#include "blo/rng.hpp"

using namespace blo;

namespace {

std::vector<double> random_values(Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return v;
}

}  // namespace

TEST_CASE("scalar table is always available") {
  CHECK(kernels::scalar().name == "scalar");
  CHECK(kernels::active().dot != nullptr);
}

TEST_CASE("simd kernels match the scalar reference") {
  const kernels::Table* simd = kernels::avx2();
  if (simd == nullptr) {
    MESSAGE("AVX2 variant unavailable on this host; equivalence not exercised");
    return;
  }
  const kernels::Table& ref = kernels::scalar();
  Rng rng(123);
  // Lengths straddle the 4-lane width and the unrolled tail.
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 101u, 1000u}) {
    CAPTURE(n);
    auto a = random_values(rng, n, 10.0);
    auto b = random_values(rng, n, 10.0);
    auto lo = random_values(rng, n, 1.0);
    std::vector<double> hi(n);
    for (std::size_t i = 0; i < n; ++i) hi[i] = lo[i] + rng.uniform(0.0, 3.0);
    if (n > 2) {
      a[0] = lo[0];  // exactly on a bound
      a[1] = hi[1] - 1e-12;
    }

    const double d_ref = ref.dot(a.data(), b.data(), n);
    const double d_simd = simd->dot(a.data(), b.data(), n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale += std::abs(a[i] * b[i]);
    CHECK(std::abs(d_ref - d_simd) <= 4.0 * std::numeric_limits<double>::epsilon() * scale);

    auto y1 = b, y2 = b;
    ref.axpy(0.37, a.data(), y1.data(), n);
    simd->axpy(0.37, a.data(), y2.data(), n);
    CHECK(y1 == y2);

    std::vector<double> m1(n), m2(n);
    ref.multiply(a.data(), b.data(), m1.data(), n);
    simd->multiply(a.data(), b.data(), m2.data(), n);
    CHECK(m1 == m2);

    ref.clamp(a.data(), lo.data(), hi.data(), m1.data(), n);
    simd->clamp(a.data(), lo.data(), hi.data(), m2.data(), n);
    CHECK(m1 == m2);

    ref.interior_mask(a.data(), lo.data(), hi.data(), 1e-9, m1.data(), n);
    simd->interior_mask(a.data(), lo.data(), hi.data(), 1e-9, m2.data(), n);
    CHECK(m1 == m2);

    CHECK(ref.all_finite(a.data(), n) == simd->all_finite(a.data(), n));
    if (n > 0) {
      a[n - 1] = std::numeric_limits<double>::quiet_NaN();
      CHECK_FALSE(ref.all_finite(a.data(), n));
      CHECK_FALSE(simd->all_finite(a.data(), n));
    }
  }
}

TEST_CASE("clamp agrees on signed zeros and infinite bounds") {
  const kernels::Table* simd = kernels::avx2();
  if (simd == nullptr) return;
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> p{-0.0, 0.0, 5.0, -5.0, 1e308};
  const std::vector<double> lo{0.0, -0.0, -inf, -inf, -inf};
  const std::vector<double> hi{0.0, -0.0, inf, inf, inf};
  std::vector<double> r1(5), r2(5);
  kernels::scalar().clamp(p.data(), lo.data(), hi.data(), r1.data(), 5);
  simd->clamp(p.data(), lo.data(), hi.data(), r2.data(), 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(r1[i] == r2[i]);
    CHECK(std::signbit(r1[i]) == std::signbit(r2[i]));
  }
}

TEST_CASE("forcing the scalar table") {
  const kernels::Table& before = kernels::active();
  kernels::use(kernels::scalar());
  CHECK(kernels::active().name == "scalar");
  kernels::use(before);
}
