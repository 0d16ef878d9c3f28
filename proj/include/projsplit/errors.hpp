#pragma once

#include <stdexcept>
#include <string>

namespace projsplit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched dimensions, operator counts, or metric weights.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A public operation produced NaN or Inf.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Stepsize or relaxation parameter outside its admissible interval.
class StepsizeError : public Error {
 public:
  using Error::Error;
};

// A resolvent or forward evaluation could not be carried out.
class ActivationError : public Error {
 public:
  using Error::Error;
};

// Inconsistent solver/problem configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A rate constant or certificate was requested without the metadata it needs.
class MetadataError : public Error {
 public:
  using Error::Error;
};

}  // namespace projsplit
