#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cello {

enum class ErrorCode {
  MalformedRecord,
  OutOfRange,
  NonMonotonicTimestamp,
  InvalidBox,
  NotIntersecting,
  DegenerateHand,
  DegeneratePose,
  ShapeMismatch,
  InsufficientData,
  VersionMismatch,
  CorruptFile,
  ModelShapeMismatch,
  NonMonotonicTime,
  EmptySession,
  StoreUnavailable,
  UnknownSession,
  UnknownUser,
  BadConfig,
  BadRequest,
  IoError,
};

const char* to_string(ErrorCode code);

// Every recoverable failure in the engine is reported as a cello::Error
// carrying a machine-readable code. Internal invariant violations use
// std::logic_error instead.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// An Error raised while reading a stream file; line numbers are 1-based.
class StreamError : public Error {
 public:
  StreamError(ErrorCode code, std::size_t line, const std::string& detail)
      : Error(code, "line " + std::to_string(line) + ": " + detail), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace cello
