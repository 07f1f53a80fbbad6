#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dpme {

enum class ErrorCode {
  NotAQMatrix,
  NotIrreducible,
  NotReversible,
  DimensionMismatch,
  InvalidDensity,
  ExponentOutOfRange,
  NonConvexF,
  BoundaryEvaluation,
  StepFailure,
  InvalidInitial,
  SingularSolve,
  InfeasibleEndpoints,
  NonConvergence,
  LeftInterior,
  NonPositive,
  ConfigError,
};

/// Stable machine-readable name, used in CLI error records.
std::string_view error_name(ErrorCode code) noexcept;

/// Process exit code for the CLI; distinct per code, never 0.
int exit_code(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// +infinity stands for "functional is infinite here" (e.g. the dissipation
/// of a density on the boundary when f' blows up at 0). It is absorbing under
/// addition and compares greater than every finite value.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace dpme
