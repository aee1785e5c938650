#pragma once

#include <stdexcept>
#include <string>

namespace modsig {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or model-violating input data (self-loops, negative weights,
/// unknown labels, parse failures).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Model parameters are infeasible for the data, or an optimizer failed.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// The assignment admits no test: the null variance of modularity is zero
/// (a single group, or every node in its own group).
class DegenerateTestError : public Error {
 public:
  using Error::Error;
};

}  // namespace modsig
