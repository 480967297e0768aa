#pragma once

#include <stdexcept>
#include <string>

namespace glovelink {

enum class ErrorCode {
  EmptyClass,
  NonFinite,
  EmptyTestSet,
  NonMonotoneTime,
  NoPeaks,
  SchemaVersionMismatch,
  MalformedLine,
  InvalidArgument,
  Io,
  BindFailure,
};

const char* to_string(ErrorCode code);

/// Exception carrying a machine-readable error code. The CLI maps it to
/// {"error": "<code>", "message": ...} on stderr.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Malformed trace/dataset/model line; `line()` is 1-based.
class MalformedLine : public Error {
 public:
  MalformedLine(std::size_t line, const std::string& what)
      : Error(ErrorCode::MalformedLine,
              "malformed line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace glovelink
