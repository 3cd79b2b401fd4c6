#pragma once

#include <stdexcept>
#include <string>

namespace carbonbn {

/// Malformed or inconsistent user input (files, names, states, options).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation could not produce a meaningful number.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evidence that has probability zero under the model.
class ZeroProbabilityEvidence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace carbonbn
