#pragma once

#include <stdexcept>
#include <string>

namespace ac2cd {

enum class ErrorCode {
  InfeasibleEquality,
  BoundViolation,
  EmptyIndexSet,
  DegenerateLevelSet,
  BacktrackOverflow,
  MaxEvalsExceeded,
  ParseError,
  LabelError,
  ConfigError,
  InstanceError,
  OptimumUnavailable,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ac2cd
