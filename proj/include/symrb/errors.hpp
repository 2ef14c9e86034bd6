#pragma once

#include <stdexcept>
#include <string>

namespace symrb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input values: non-unitary matrices, wrong dimensions, invalid states.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Requested size exceeds a configured limit.
class ResourceLimitError : public Error {
 public:
  using Error::Error;
};

// An internal cross-check failed (completeness, integrality, closure).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace symrb
