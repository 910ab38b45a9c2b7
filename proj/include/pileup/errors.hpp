#pragma once
#include <stdexcept>
#include <string>

namespace pileup {

/// Stable error taxonomy; the CLI maps codes onto process exit codes.
enum class ErrorCode {
  Config,            // bad or missing configuration
  Parse,             // malformed input file
  EmptyStream,       // no complete cycle available
  Unavailable,       // no density registered for this model
  OracleUnavailable, // diagnostic requested without a reference transform
  RejectionStall,    // sampler acceptance rate collapsed
  DenominatorFloor,  // Bromwich denominator below the configured floor
  NanDetected,       // non-finite value inside the inversion
  Resolution,        // quadrature grid too coarse for the oscillation
  Overflow,          // exponent guard tripped
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::Config: return "CONFIG";
    case ErrorCode::Parse: return "PARSE";
    case ErrorCode::EmptyStream: return "EMPTY_STREAM";
    case ErrorCode::Unavailable: return "UNAVAILABLE";
    case ErrorCode::OracleUnavailable: return "ORACLE_UNAVAILABLE";
    case ErrorCode::RejectionStall: return "REJECTION_STALL";
    case ErrorCode::DenominatorFloor: return "DENOMINATOR_FLOOR";
    case ErrorCode::NanDetected: return "NAN_DETECTED";
    case ErrorCode::Resolution: return "RESOLUTION";
    case ErrorCode::Overflow: return "OVERFLOW";
  }
  return "UNKNOWN";
}

} // namespace pileup
