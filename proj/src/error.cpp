#include "qmrisim/error.hpp"

namespace qmrisim {

std::string_view toString(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NonPositiveRate: return "NonPositiveRate";
    case ErrorCode::MTOutOfRange: return "MTOutOfRange";
    case ErrorCode::NegativePD: return "NegativePD";
    case ErrorCode::NonPositiveB1: return "NonPositiveB1";
    case ErrorCode::NonBinaryMask: return "NonBinaryMask";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::WrongSequenceKind: return "WrongSequenceKind";
    case ErrorCode::InvalidSequence: return "InvalidSequence";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::CropTooLarge: return "CropTooLarge";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::MissingSource: return "MissingSource";
    case ErrorCode::MissingMap: return "MissingMap";
    case ErrorCode::Malformed: return "Malformed";
    case ErrorCode::UnsupportedDims: return "UnsupportedDims";
    case ErrorCode::UnsupportedDatatype: return "UnsupportedDatatype";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::NonFinite: return "NonFinite";
  }
  return "Unknown";
}

}  // namespace qmrisim
