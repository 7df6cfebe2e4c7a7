#pragma once

#include <cstddef>
#include <vector>

#include "blo/vector.hpp"

namespace blo {

/// Per-coordinate closed interval set. Bounds may be infinite; an all-infinite
/// box is the whole space and projection onto it is the identity.
class BoxSet {
 public:
  BoxSet(std::vector<double> lower, std::vector<double> upper);

  static BoxSet uniform(std::size_t n, double lower, double upper);
  static BoxSet whole_space(std::size_t n);

  std::size_t size() const noexcept { return lower_.size(); }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }

  /// True when every bound is finite (a compact box).
  bool bounded() const noexcept;
  bool contains(const Vector& p, double tol = 0.0) const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

inline constexpr double kDefaultMaskTolerance = 1e-9;

/// Coordinate-wise clamp of p into the box.
Vector project(const Vector& p, const BoxSet& box);

/// Diagonal of the projection's generalized Jacobian at p: 1 on coordinates
/// strictly inside the box by more than `tol`, 0 on clamped or near-boundary ones.
Vector active_mask(const Vector& p, const BoxSet& box, double tol = kDefaultMaskTolerance);

}  // namespace blo
