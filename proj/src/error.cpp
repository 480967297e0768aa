#include "glovelink/error.hpp"

namespace glovelink {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::NonMonotoneTime: return "NonMonotoneTime";
    case ErrorCode::NoPeaks: return "NoPeaks";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::BindFailure: return "BindFailure";
  }
  return "Unknown";
}

}  // namespace glovelink
