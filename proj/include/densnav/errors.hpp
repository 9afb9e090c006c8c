#pragma once

#include <stdexcept>
#include <string>

namespace densnav {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Density evaluated too close to the target, where V(x) -> 0.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// A field was evaluated at a point inside an unsafe ball.
class InsideUnsafeError : public Error {
 public:
  using Error::Error;
};

// Rollout requested from a start point inside an unsafe ball.
class InvalidStartError : public Error {
 public:
  using Error::Error;
};

class WindowTooLargeError : public Error {
 public:
  using Error::Error;
};

class NoContactsError : public Error {
 public:
  using Error::Error;
};

class SingularConfigurationError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

// Reference sample spacing does not match the tracker time step.
class TimeStepMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace densnav
