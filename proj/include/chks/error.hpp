#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chks {

enum class ErrorCode {
  OutOfDomain,
  NonZeroMean,
  SolverDiverged,
  NewtonDiverged,
  PositivityLost,
  NonpositiveSigma,
  NegativeSigma,
  DomainViolation,
  IncompatibleGrids,
  InvalidArgument,
  InvariantViolation,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NonZeroMean: return "NonZeroMean";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::PositivityLost: return "PositivityLost";
    case ErrorCode::NonpositiveSigma: return "NonpositiveSigma";
    case ErrorCode::NegativeSigma: return "NegativeSigma";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::IncompatibleGrids: return "IncompatibleGrids";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace chks
