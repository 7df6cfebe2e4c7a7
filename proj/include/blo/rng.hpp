#pragma once

#include <cstdint>
#include <random>

namespace blo {

/// Portable random source: mt19937_64 output is fixed by the standard and the
/// derived draws below avoid the implementation-defined std distributions, so
/// a seed reproduces the same numbers on every toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller).
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Seed for run `run_id` derived from a root seed: splitmix64(root + run_id).
std::uint64_t split_seed(std::uint64_t root, std::uint64_t run_id);

}  // namespace blo
