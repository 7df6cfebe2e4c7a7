#include <cmath>

#include "blo/errors.hpp"
#include "blo/hyperclean.hpp"

namespace blo {
namespace {
void validate(const LqConfig& cfg) {
  if (!(cfg.q > 0.0 && cfg.q < 1.0)) throw InvalidArgument("LqConfig: q must lie in (0, 1)");
  if (!cfg.eps.all_finite()) throw InvalidArgument("LqConfig: eps must be finite");
}
}  // namespace

double lq_penalty(const Vector& w, const LqConfig& cfg) {
  validate(cfg);
  return std::pow(norm(w) + norm(cfg.eps), cfg.q / 2.0);
}

Vector lq_penalty_gradient(const Vector& w, const LqConfig& cfg) {
  validate(cfg);
  const double wn = norm(w);
  if (wn == 0.0) return Vector(w.size());
  const double coeff = (cfg.q / 2.0) * std::pow(wn + norm(cfg.eps), cfg.q / 2.0 - 1.0) / wn;
  return coeff * w;
}

}  // namespace blo
