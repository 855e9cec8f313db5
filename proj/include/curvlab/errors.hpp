#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace curvlab {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad input: violated precondition, missing parameter, malformed descriptor.
class ValidationError : public Error {
public:
  using Error::Error;
};

// Iterative method failed to converge or detected divergence.
class SolverError : public Error {
public:
  using Error::Error;
};

// The problem provably has no solution (an integral identity cannot hold).
class SolvabilityError : public SolverError {
public:
  using SolverError::SolverError;
};

// A runtime self-check failed (model relations, ordering, BPS identity).
class InconsistencyError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

// Short scientific rendering for error messages.
inline std::string fmt_sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

} // namespace curvlab
