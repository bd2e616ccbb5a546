#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qh {

enum class ErrorCode {
  InvalidParams,
  ZeroDenominator,
  ZeroScale,
  PoleInInterval,
  SingularMap,
  DegenerateCovariance,
  NonpositiveChiTilde,
  WrongOrientation,
  SignViolation,
  NonpositiveDenominator,
  NonpositiveK,
  NonpositiveKappaSq,
  InfeasibleTarget,
  DomainViolation,
  InvalidDescriptor,
  GridMismatch,
  TooLarge,
  EmptyEnsemble,
  SingularDesign,
  MismatchedTriples,
  ParseError,
};

std::string_view error_name(ErrorCode code) noexcept;

/// Domain error raised by every library operation. `name()` is the stable
/// identifier printed by the command line tool.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& detail = {});

}  // namespace qh
