#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tensorattn {

enum class ErrorCode {
  DimensionMismatch,
  NotSquare,
  NonFinite,
  SingularDenominator,
  DegenerateNormalizer,
  DegenerateDenominator,
  ComplexNotSupported,
  DvMismatch,
  ShapeTooLarge,
  UnknownVariant,
  InvalidArgument,
  InvalidConfig,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SingularDenominator: return "SingularDenominator";
    case ErrorCode::DegenerateNormalizer: return "DegenerateNormalizer";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::ComplexNotSupported: return "ComplexNotSupported";
    case ErrorCode::DvMismatch: return "DvMismatch";
    case ErrorCode::ShapeTooLarge: return "ShapeTooLarge";
    case ErrorCode::UnknownVariant: return "UnknownVariant";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Every failure raised by the library. The message is prefixed with the
/// error code name so that logs stay greppable.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tensorattn
