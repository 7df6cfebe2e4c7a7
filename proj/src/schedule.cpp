#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "blo/dynamics.hpp"
#include "blo/errors.hpp"

namespace blo {

StepSchedule::StepSchedule(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("StepSchedule: empty step list");
  for (double a : values_) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("StepSchedule: steps must be positive");
  }
  const auto [mn, mx] = std::minmax_element(values_.begin(), values_.end());
  lo_ = *mn;
  hi_ = *mx;
}

StepSchedule StepSchedule::constant(double alpha) { return StepSchedule({alpha}); }

StepSchedule StepSchedule::per_step(std::vector<double> alphas) {
  return StepSchedule(std::move(alphas));
}

void StepSchedule::check_window(double lipschitz) const {
  if (!(hi_ < 2.0 / lipschitz)) {
    throw InvalidArgument(fmt::format(
        "StepSchedule: largest step {} is outside the descent window (0, 2/L_f = {})", hi_,
        2.0 / lipschitz));
  }
}

}  // namespace blo
