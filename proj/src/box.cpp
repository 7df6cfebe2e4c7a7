#include "blo/box.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "blo/errors.hpp"
#include "blo/kernels.hpp"

namespace blo {

BoxSet::BoxSet(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw InvalidArgument("BoxSet: lower and upper bounds differ in dimension");
  }
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (std::isnan(lower_[i]) || std::isnan(upper_[i]) || lower_[i] > upper_[i]) {
      throw InvalidArgument(fmt::format("BoxSet: invalid interval at coordinate {}", i));
    }
  }
}

BoxSet BoxSet::uniform(std::size_t n, double lower, double upper) {
  return BoxSet(std::vector<double>(n, lower), std::vector<double>(n, upper));
}

BoxSet BoxSet::whole_space(std::size_t n) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return uniform(n, -inf, inf);
}

bool BoxSet::bounded() const noexcept {
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i])) return false;
  }
  return true;
}

bool BoxSet::contains(const Vector& p, double tol) const {
  if (p.size() != size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (p[i] < lower_[i] - tol || p[i] > upper_[i] + tol) return false;
  }
  return true;
}

namespace {
void check_dim(const Vector& p, const BoxSet& box, const char* what) {
  if (p.size() != box.size()) {
    throw InvalidArgument(
        fmt::format("{}: point has dimension {} but box has {}", what, p.size(), box.size()));
  }
}
}  // namespace

Vector project(const Vector& p, const BoxSet& box) {
  check_dim(p, box, "project");
  Vector out(p.size());
  kernels::active().clamp(p.data(), box.lower().data(), box.upper().data(), out.data(), p.size());
  return out;
}

Vector active_mask(const Vector& p, const BoxSet& box, double tol) {
  check_dim(p, box, "active_mask");
  if (!(tol > 0.0)) throw InvalidArgument("active_mask: tolerance must be positive");
  Vector out(p.size());
  kernels::active().interior_mask(p.data(), box.lower().data(), box.upper().data(), tol,
                                  out.data(), p.size());
  return out;
}

}  // namespace blo
