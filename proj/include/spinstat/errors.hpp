#pragma once

#include <stdexcept>
#include <string>

namespace spinstat {

// Bad input: out-of-range parameters, malformed configs, size caps.
// The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A well-formed request that failed while computing (fit divergence,
// no usable lines, too many failed trials). CLI exit code 2.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SizeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SectorError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class CommutationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class FitError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class NoBoundError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class CalibrationError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

}  // namespace spinstat
