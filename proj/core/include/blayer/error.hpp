#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blayer {

enum class ErrorCode {
  InvalidParameter,
  InvalidBoundary,
  DomainError,
  DefectiveMatrix,
  WrongRegime,
  FitAmbiguous,
  NewtonDiverged,
  StepUnderflow,
  NonFinite,
  TraceFailed,
  UnexpectedTerminal,
  OutOfRange,
  ProfileDiverged,
  TailTooShort,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying one of the library's error codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace blayer
