#include "qh/core/error.hpp"

namespace qh {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::ZeroScale: return "ZeroScale";
    case ErrorCode::PoleInInterval: return "PoleInInterval";
    case ErrorCode::SingularMap: return "SingularMap";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::NonpositiveChiTilde: return "NonpositiveChiTilde";
    case ErrorCode::WrongOrientation: return "WrongOrientation";
    case ErrorCode::SignViolation: return "SignViolation";
    case ErrorCode::NonpositiveDenominator: return "NonpositiveDenominator";
    case ErrorCode::NonpositiveK: return "NonpositiveK";
    case ErrorCode::NonpositiveKappaSq: return "NonpositiveKappaSq";
    case ErrorCode::InfeasibleTarget: return "InfeasibleTarget";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::InvalidDescriptor: return "InvalidDescriptor";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::MismatchedTriples: return "MismatchedTriples";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(detail.empty() ? std::string(error_name(code))
                                        : std::string(error_name(code)) + ": " + detail),
      code_(code) {}

void raise(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

}  // namespace qh
