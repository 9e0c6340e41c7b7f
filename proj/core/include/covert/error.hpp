#pragma once

#include <stdexcept>
#include <string>

namespace covert {

enum class ErrorCode {
  InvalidModel,
  InvalidArgument,
  DimensionMismatch,
  Infeasible,
  Unbounded,
  InfeasibleLp,
  InfeasibleStart,
  SolverStall,
  NoConvergence,
  ZeroStateMass,
  NotIrreducible,
  NonPositiveEntry,
  StepTooLarge,
  BcdNoProgress,
  EmptySample,
  UnvisitedRow,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace covert
