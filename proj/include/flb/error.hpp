#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flb {

enum class ErrorCode {
  NotHermitian,
  NonFinite,
  NoConvergence,
  Singular,
  NotPositiveDefinite,
  InvalidDimension,
  ZeroTau,
  OffCircle,
  InvalidResolution,
  CouplingNotOne,
  DegenerateAngles,
  IndexOutOfRange,
  HypothesisNotMet,
  InvalidProblem,
  Parse,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::ZeroTau: return "ZeroTau";
    case ErrorCode::OffCircle: return "OffCircle";
    case ErrorCode::InvalidResolution: return "InvalidResolution";
    case ErrorCode::CouplingNotOne: return "CouplingNotOne";
    case ErrorCode::DegenerateAngles: return "DegenerateAngles";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::HypothesisNotMet: return "HypothesisNotMet";
    case ErrorCode::InvalidProblem: return "InvalidProblem";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace flb
