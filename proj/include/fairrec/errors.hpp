#pragma once

#include <stdexcept>
#include <string>

namespace fairrec {

// Malformed inputs: bad dimensions, priors off the simplex, groups out of
// range. Thrown before any computation starts.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Inputs are well formed but the requested quantity does not exist
// (zero-mass group, non-partition collection where one is required, ...).
class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

// A measurement symbol with zero probability under the assumed model was
// conditioned on; the posterior is undefined there.
class UnreachableMeasurementError : public PreconditionError {
 public:
  explicit UnreachableMeasurementError(const std::string& what) : PreconditionError(what) {}
};

// A sampler iterate left the finite range. Carries the step index at which
// the first non-finite value appeared.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long step_index)
      : std::runtime_error(what), step(step_index) {}
  long step;
};

}  // namespace fairrec
