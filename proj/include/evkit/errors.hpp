#pragma once

#include <stdexcept>
#include <string>

namespace evkit {

// Base for all toolkit failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (files, panels, configs).
class InputError : public Error {
 public:
  using Error::Error;
};

// Singular systems, non-stationary estimates, model domain exits.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace evkit
