#pragma once

#include <stdexcept>
#include <string>

namespace lrmc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument to a constructor or family instantiation (k out of range, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or malformed numeric input.
class InputError : public Error {
 public:
  using Error::Error;
};

/// The block used as a Schur pivot is not invertible in the scalar domain.
class SingularBlock : public Error {
 public:
  using Error::Error;
};

/// A pivot or linear solve degenerated; the filling is not generic enough.
class NotGeneric : public Error {
 public:
  using Error::Error;
};

/// The pattern does not have the shape a completion procedure requires.
class PatternShape : public Error {
 public:
  using Error::Error;
};

/// Matrix too small for the requested corank in the circulant recursions.
class ThresholdNotMet : public Error {
 public:
  using Error::Error;
};

/// No rank up to the requested bound was certified by the local solver.
class SolverExhausted : public Error {
 public:
  using Error::Error;
};

/// Multi-start Newton produced no certified point at all.
class EmptyFiberEvidence : public Error {
 public:
  using Error::Error;
};

}  // namespace lrmc
