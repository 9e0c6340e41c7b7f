#include "covert/error.hpp"

namespace covert {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::InfeasibleLp: return "InfeasibleLp";
    case ErrorCode::InfeasibleStart: return "InfeasibleStart";
    case ErrorCode::SolverStall: return "SolverStall";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ZeroStateMass: return "ZeroStateMass";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::NonPositiveEntry: return "NonPositiveEntry";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::BcdNoProgress: return "BcdNoProgress";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::UnvisitedRow: return "UnvisitedRow";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace covert
