#pragma once

#include <stdexcept>
#include <string>

namespace homog {

enum class ErrorCode {
  EmptyBall,
  CutoffTooLarge,
  GridMismatch,
  EllipticityViolation,
  NonCompatibleRhs,
  MaxIterExceeded,
  PreconditionDiv,
  RadiusTooLarge,
  BallOutsideDomain,
  PreconditionGeometry,
  PreconditionGrowth,
  ParseError,
  ValidationError,
};

const char* to_string(ErrorCode code);

/// Domain error carrying a machine-readable code next to the message.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

}  // namespace homog
