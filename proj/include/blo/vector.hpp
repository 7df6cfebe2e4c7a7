#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace blo {

/// Dense real vector carrying x, y and z. Entries are finite; constructors that
/// take external data check this, arithmetic results are checked by callers
/// that can attribute a failure (see NumericalFailure).
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : values_(n, fill) {}
  Vector(std::initializer_list<double> values);
  explicit Vector(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }
  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  bool all_finite() const noexcept;

  Vector& operator+=(const Vector& other);
  Vector& operator-=(const Vector& other);
  Vector& operator*=(double s);

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> values_;
};

Vector operator+(Vector a, const Vector& b);
Vector operator-(Vector a, const Vector& b);
Vector operator*(double s, Vector v);
Vector operator-(Vector v);

double dot(const Vector& a, const Vector& b);
double norm(const Vector& v);
double distance(const Vector& a, const Vector& b);
double norm_inf(const Vector& v);

/// y += a * x
void axpy(double a, const Vector& x, Vector& y);

Vector hadamard(const Vector& a, const Vector& b);

/// Concatenate two blocks (used for stacked lower-level variables).
Vector concat(const Vector& a, const Vector& b);

/// Throws InvalidArgument if sizes differ; `what` names the calling operation.
void require_same_size(const Vector& a, const Vector& b, const char* what);

}  // namespace blo
