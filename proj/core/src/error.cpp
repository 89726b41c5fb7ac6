#include "blayer/error.hpp"

namespace blayer {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidBoundary: return "InvalidBoundary";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DefectiveMatrix: return "DefectiveMatrix";
    case ErrorCode::WrongRegime: return "WrongRegime";
    case ErrorCode::FitAmbiguous: return "FitAmbiguous";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::TraceFailed: return "TraceFailed";
    case ErrorCode::UnexpectedTerminal: return "UnexpectedTerminal";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ProfileDiverged: return "ProfileDiverged";
    case ErrorCode::TailTooShort: return "TailTooShort";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace blayer
