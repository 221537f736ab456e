#pragma once

#include <stdexcept>
#include <string>

namespace flowsub {

enum class ErrorCode {
  kDimensionMismatch,
  kMissingFocal,
  kEmptyRegions,
  kNonFiniteInput,
  kNonPositiveDepth,
  kInvalidPartition,
  kParamOutOfRange,
  kDegenerateScene,
  kNonFiniteGradient,
  kEmptyForeground,
  kEmptyValidMask,
  kBadMagic,
  kTruncatedFile,
  kDimensionOverflow,
  kBadHeader,
  kIoError,
  kBadInput,
};

const char* to_string(ErrorCode code);

/// All library failures are reported through this exception type; code()
/// identifies the failure class machine-readably (the CLI serializes it).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kMissingFocal: return "MissingFocal";
    case ErrorCode::kEmptyRegions: return "EmptyRegions";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kNonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::kInvalidPartition: return "InvalidPartition";
    case ErrorCode::kParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::kDegenerateScene: return "DegenerateScene";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kEmptyForeground: return "EmptyForeground";
    case ErrorCode::kEmptyValidMask: return "EmptyValidMask";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kDimensionOverflow: return "DimensionOverflow";
    case ErrorCode::kBadHeader: return "BadHeader";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kBadInput: return "BadInput";
  }
  return "UnknownError";
}

}  // namespace flowsub
