#include "blo/vector.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "blo/errors.hpp"
#include "blo/kernels.hpp"

namespace blo {

Vector::Vector(std::initializer_list<double> values) : values_(values) {
  if (!all_finite()) throw InvalidArgument("Vector: non-finite entry");
}

Vector::Vector(std::vector<double> values) : values_(std::move(values)) {
  if (!all_finite()) throw InvalidArgument("Vector: non-finite entry");
}

bool Vector::all_finite() const noexcept {
  return kernels::active().all_finite(values_.data(), values_.size());
}

Vector& Vector::operator+=(const Vector& other) {
  require_same_size(*this, other, "Vector::operator+=");
  kernels::active().axpy(1.0, other.data(), data(), size());
  return *this;
}

Vector& Vector::operator-=(const Vector& other) {
  require_same_size(*this, other, "Vector::operator-=");
  kernels::active().axpy(-1.0, other.data(), data(), size());
  return *this;
}

Vector& Vector::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Vector operator+(Vector a, const Vector& b) { return a += b; }
Vector operator-(Vector a, const Vector& b) { return a -= b; }
Vector operator*(double s, Vector v) { return v *= s; }
Vector operator-(Vector v) {
  for (double& x : v) x = -x;
  return v;
}

double dot(const Vector& a, const Vector& b) {
  require_same_size(a, b, "dot");
  return kernels::active().dot(a.data(), b.data(), a.size());
}

double norm(const Vector& v) { return std::sqrt(dot(v, v)); }

double distance(const Vector& a, const Vector& b) { return norm(a - b); }

double norm_inf(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void axpy(double a, const Vector& x, Vector& y) {
  require_same_size(x, y, "axpy");
  kernels::active().axpy(a, x.data(), y.data(), x.size());
}

Vector hadamard(const Vector& a, const Vector& b) {
  require_same_size(a, b, "hadamard");
  Vector out(a.size());
  kernels::active().multiply(a.data(), b.data(), out.data(), a.size());
  return out;
}

Vector concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  std::copy(a.begin(), a.end(), out.begin());
  std::copy(b.begin(), b.end(), out.begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

void require_same_size(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    throw InvalidArgument(fmt::format("{}: dimension mismatch ({} vs {})", what, a.size(), b.size()));
  }
}

}  // namespace blo
