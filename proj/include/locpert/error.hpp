#pragma once

#include <stdexcept>
#include <string>

namespace locpert {

// Precondition violations: bad axis, mismatched grids, non-positive step, ...
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent run configuration.  Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Base for failures that abort a running simulation.  Maps to CLI exit code 2.
class RuntimeAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The realized displacement of a diffeomorphism increment exceeds the bound
// that keeps the map a discrete bijection.
class StepSizeError : public RuntimeAbort {
 public:
  using RuntimeAbort::RuntimeAbort;
};

class StabilityError : public RuntimeAbort {
 public:
  using RuntimeAbort::RuntimeAbort;
};

class PositivityError : public RuntimeAbort {
 public:
  using RuntimeAbort::RuntimeAbort;
};

}  // namespace locpert
