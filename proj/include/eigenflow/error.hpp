#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eigenflow {

enum class ErrorKind {
  InvalidArgument,
  NotStarShaped,
  DegenerateBoundary,
  MeshFailure,
  MissingDerivative,
  SingularElement,
  WrongBC,
  ConvergenceFailure,
  FactorizationFailure,
  NoEigenvalueNear,
  AmbiguousCluster,
  SingularSystem,
  ClusterSplitLeak,
  ProjectionsTooFar,
  GroupingUnstable,
  GridTooCoarse,
  NotACrossing,
  StrongTraceUnavailable,
  DegenerateCrossing,
  BranchPairingAmbiguous,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit-code mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace eigenflow
