#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qmrisim {

enum class ErrorCode {
  InvalidGrid,
  GridMismatch,
  NonPositiveRate,
  MTOutOfRange,
  NegativePD,
  NonPositiveB1,
  NonBinaryMask,
  OutOfBounds,
  WrongSequenceKind,
  InvalidSequence,
  InvalidRange,
  InvalidArgument,
  CropTooLarge,
  SchemaMismatch,
  MissingSource,
  MissingMap,
  Malformed,
  UnsupportedDims,
  UnsupportedDatatype,
  IoFailure,
  EmptyMask,
  NonFinite,
};

std::string_view toString(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(toString(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qmrisim
