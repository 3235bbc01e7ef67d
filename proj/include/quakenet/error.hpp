#pragma once

#include <stdexcept>
#include <string>

namespace quakenet {

enum class ErrorCode {
  InvalidArgument,
  MissingHeader,
  MalformedRow,
  EmptyField,
  InvalidRange,
  UnknownZone,
  EmptySampleSet,
  DegenerateVariable,
  CountMismatch,
  EmptyInput,
  DimensionMismatch,
  NonFiniteParameter,
  UnknownModel,
  EmptySplit,
  NonFiniteLoss,
  ZeroVariance,
  InsufficientSamples,
  IOFailure,
  Config,
  MissingArtifact,
};

const char* to_string(ErrorCode code) noexcept;

// All library failures are reported as Error; `code()` identifies the
// failure class so callers (and the C API) can map it without string checks.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace quakenet
