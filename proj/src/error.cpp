#include "eigenflow/error.hpp"

namespace eigenflow {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotStarShaped: return "NotStarShaped";
    case ErrorKind::DegenerateBoundary: return "DegenerateBoundary";
    case ErrorKind::MeshFailure: return "MeshFailure";
    case ErrorKind::MissingDerivative: return "MissingDerivative";
    case ErrorKind::SingularElement: return "SingularElement";
    case ErrorKind::WrongBC: return "WrongBC";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::FactorizationFailure: return "FactorizationFailure";
    case ErrorKind::NoEigenvalueNear: return "NoEigenvalueNear";
    case ErrorKind::AmbiguousCluster: return "AmbiguousCluster";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::ClusterSplitLeak: return "ClusterSplitLeak";
    case ErrorKind::ProjectionsTooFar: return "ProjectionsTooFar";
    case ErrorKind::GroupingUnstable: return "GroupingUnstable";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::NotACrossing: return "NotACrossing";
    case ErrorKind::StrongTraceUnavailable: return "StrongTraceUnavailable";
    case ErrorKind::DegenerateCrossing: return "DegenerateCrossing";
    case ErrorKind::BranchPairingAmbiguous: return "BranchPairingAmbiguous";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace eigenflow
