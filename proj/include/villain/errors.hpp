#pragma once

#include <stdexcept>
#include <string>

namespace villain {

/// Precondition violated by the caller (bad shape, out-of-range degree, non-SPD input).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An internal consistency check failed: an identity that must hold by
/// construction did not (non-saturated lattice, singular solve, bad lift).
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical budget could not be met with the requested parameters.
class PrecisionError : public std::runtime_error {
 public:
  PrecisionError(const std::string& what, double bound)
      : std::runtime_error(what), bound_(bound) {}

  /// The error bound that exceeded its budget.
  double bound() const noexcept { return bound_; }

 private:
  double bound_;
};

/// A shared resource (the result cache) was busy; the operation may be retried.
class RetryableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace villain
