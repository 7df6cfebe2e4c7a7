#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace blo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised when a gradient or iterate stops being finite. `step()` is the
/// inner step (or outer iteration, once rethrown by a solver) where it happened.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// A curvature oracle was required but the problem does not provide one.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class UnsupportedProblem : public Error {
 public:
  using Error::Error;
};

/// Conjugate gradients did not reach the requested tolerance.
class IllConditioned : public Error {
 public:
  IllConditioned(const std::string& what, std::size_t iterations)
      : Error(what), iterations_(iterations) {}
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

}  // namespace blo
