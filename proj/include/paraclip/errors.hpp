#pragma once

#include <stdexcept>
#include <string>

namespace paraclip {

/// Invalid argument passed to a public entry point (range, sign, count).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to produce a result satisfying its contract.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or descriptor.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometric input that violates a structural invariant (open cell, bad face).
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace paraclip
