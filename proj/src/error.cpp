#include "dpme/error.hpp"

namespace dpme {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotAQMatrix: return "NotAQMatrix";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::NotReversible: return "NotReversible";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidDensity: return "InvalidDensity";
    case ErrorCode::ExponentOutOfRange: return "ExponentOutOfRange";
    case ErrorCode::NonConvexF: return "NonConvexF";
    case ErrorCode::BoundaryEvaluation: return "BoundaryEvaluation";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::InvalidInitial: return "InvalidInitial";
    case ErrorCode::SingularSolve: return "SingularSolve";
    case ErrorCode::InfeasibleEndpoints: return "InfeasibleEndpoints";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::LeftInterior: return "LeftInterior";
    case ErrorCode::NonPositive: return "NonPositive";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

int exit_code(ErrorCode code) noexcept { return 10 + static_cast<int>(code); }

}  // namespace dpme
