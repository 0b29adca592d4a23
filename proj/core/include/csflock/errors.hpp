#pragma once

#include <stdexcept>
#include <string>

namespace csflock {

// Every failure raised by the core library derives from Error. The CLI maps
// the three families below onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed configuration, non-finite horizons, bad sizes.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Mathematical domain violations.
class DomainError : public Error {
 public:
  using Error::Error;
};

// An operation was asked for outside of the exponent regime it is defined in.
class RegimeError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Argument outside the range of an inverse potential.
class RangeError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Input is not in the zero-mean frame and strict mode was requested.
class NormalizationError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Two distinct particles sit on top of each other where the kernel blows up.
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Numerical procedures that did not reach their target.
class SolverError : public Error {
 public:
  using Error::Error;
};

class StiffnessError : public SolverError {
 public:
  StiffnessError(const std::string& what, double time, std::size_t i, std::size_t j,
                 double distance)
      : SolverError(what), time_(time), i_(i), j_(j), distance_(distance) {}

  double time() const noexcept { return time_; }
  std::size_t first() const noexcept { return i_; }
  std::size_t second() const noexcept { return j_; }
  double distance() const noexcept { return distance_; }

 private:
  double time_;
  std::size_t i_;
  std::size_t j_;
  double distance_;
};

}  // namespace csflock
