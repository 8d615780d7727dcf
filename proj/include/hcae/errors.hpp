#pragma once

#include <stdexcept>
#include <string>

namespace hcae {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad argument values (counts, ranges, malformed config).
struct ParameterError : Error {
  using Error::Error;
};

// Input data violates a documented invariant (asymmetry, NaN, non-square).
struct ValidationError : Error {
  using Error::Error;
};

// Non-conformable matrix shapes.
struct ShapeError : Error {
  using Error::Error;
};

// File system / parsing failures.
struct IoError : Error {
  using Error::Error;
};

// Numerical failure during optimization (NaN loss, NaN gradient).
struct TrainingError : Error {
  using Error::Error;
};

// Evaluation protocol cannot be carried out (class too small, single class).
struct ProtocolError : Error {
  using Error::Error;
};

}  // namespace hcae
