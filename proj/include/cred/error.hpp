#pragma once

#include <stdexcept>
#include <string>

namespace cred {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An environment parameter lies outside its box.
class BoundsError : public Error {
 public:
  using Error::Error;
};

class InvalidActionError : public Error {
 public:
  using Error::Error;
};

class InvalidTrajectoryError : public Error {
 public:
  using Error::Error;
};

/// A domain-type invariant failed. `what()` names the invariant.
class InvariantError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Reward difference is undefined when the ground-truth return is ~0.
class UndefinedBaselineError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure (e.g. a kernel matrix that stays indefinite).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cred
