#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nash {

enum class ErrorCode {
  InvalidArgument,
  InvalidExpression,
  DomainViolation,
  ExactnessUnavailable,
  ArityMismatch,
  AlphabetMismatch,
  DomainExit,
  BlowUp,
  OffGrid,
  ExpressionBlowup,
  DegenerateSamples,
  IllConditioned,
  NewtonDiverged,
  DerivativeVanished,
  NoValidShiftInput,
  FitFailure,
  NotReachableInput,
  NotBijective,
  DimensionMismatch,
  VerificationFailed,
  ParseError,
};

std::string_view error_name(ErrorCode code) noexcept;

/// Every failure reported by the library carries one of the codes above, so
/// callers (CLI, Python) can dispatch on the code rather than on message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace nash
