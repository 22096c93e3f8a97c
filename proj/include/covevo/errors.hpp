#pragma once

#include <stdexcept>
#include <string>

namespace covevo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user input (degree distributions, flags, configs).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A quantity with a 1/x or 1/e factor was requested where x or e vanishes.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Requested value lies outside the invertible range (e.g. tau beyond the y floor).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Integer node counts cannot reproduce equal edge totals on both sides.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Fixed-step integration blew up.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

/// The critical-point minimizer sits on the boundary of the search grid.
class DegenerateMinimumError : public Error {
 public:
  using Error::Error;
};

}  // namespace covevo
