#include "nash/error.hpp"

namespace nash {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidExpression: return "InvalidExpression";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::ExactnessUnavailable: return "ExactnessUnavailable";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::AlphabetMismatch: return "AlphabetMismatch";
    case ErrorCode::DomainExit: return "DomainExit";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::OffGrid: return "OffGrid";
    case ErrorCode::ExpressionBlowup: return "ExpressionBlowup";
    case ErrorCode::DegenerateSamples: return "DegenerateSamples";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::DerivativeVanished: return "DerivativeVanished";
    case ErrorCode::NoValidShiftInput: return "NoValidShiftInput";
    case ErrorCode::FitFailure: return "FitFailure";
    case ErrorCode::NotReachableInput: return "NotReachableInput";
    case ErrorCode::NotBijective: return "NotBijective";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::VerificationFailed: return "VerificationFailed";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace nash
