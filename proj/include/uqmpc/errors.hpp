#pragma once

#include <stdexcept>
#include <string>

namespace uqmpc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};
struct DimensionUnsupported : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};
struct SingularMatrix : Error {
  using Error::Error;
};
struct NotPositiveDefinite : Error {
  using Error::Error;
};
struct IterationLimit : Error {
  using Error::Error;
};
struct NoConvergence : Error {
  using Error::Error;
};
struct UnstableClosedLoop : Error {
  using Error::Error;
};
struct EmptyPolytope : Error {
  using Error::Error;
};
struct SampleOutsideW : Error {
  using Error::Error;
};
struct UnboundedOmega : Error {
  using Error::Error;
};
struct StructurallyInfeasible : Error {
  using Error::Error;
};

// Raised when a solver returns a result that fails its own certificate
// (feasibility recheck, coverage recheck). Indicates a bug, not bad input.
struct InternalError : Error {
  using Error::Error;
};

}  // namespace uqmpc
