#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mqed {

enum class ErrorCode {
  EmitterBelowInterface,
  CoincidentEmitters,
  InvalidEmitter,
  InvalidEnvironment,
  NonpositiveFrequency,
  CoincidentPointsRealPart,
  QuadratureNotConverged,
  ZeroDiagonal,
  NotPositiveSemidefinite,
  FitDidNotConverge,
  StepSizeTooLarge,
  NonPhysicalState,
  KernelGridTooCoarse,
  NonDegenerateEmitters,
  ShapeMismatch,
  GridMismatch,
  InvalidGrid,
  ConfigParseError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmitterBelowInterface: return "EmitterBelowInterface";
    case ErrorCode::CoincidentEmitters: return "CoincidentEmitters";
    case ErrorCode::InvalidEmitter: return "InvalidEmitter";
    case ErrorCode::InvalidEnvironment: return "InvalidEnvironment";
    case ErrorCode::NonpositiveFrequency: return "NonpositiveFrequency";
    case ErrorCode::CoincidentPointsRealPart: return "CoincidentPointsRealPart";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::ZeroDiagonal: return "ZeroDiagonal";
    case ErrorCode::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case ErrorCode::FitDidNotConverge: return "FitDidNotConverge";
    case ErrorCode::StepSizeTooLarge: return "StepSizeTooLarge";
    case ErrorCode::NonPhysicalState: return "NonPhysicalState";
    case ErrorCode::KernelGridTooCoarse: return "KernelGridTooCoarse";
    case ErrorCode::NonDegenerateEmitters: return "NonDegenerateEmitters";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::ConfigParseError: return "ConfigParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// All library failures surface as this exception; code() is stable and
// machine-readable, what() carries the context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace mqed
