#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace masklink {

enum class ErrorCode {
  InvalidGeometry,
  UnsupportedPair,
  NonPositiveTheta,
  EmptyTargetSet,
  ThetaMismatch,
  DomainError,
  ParseError,
  ValidationError,
  IoError,
  UsageError,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the WKT parser; `position` is the byte offset in the input text.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& reason)
      : Error(ErrorCode::ParseError,
              "parse error at offset " + std::to_string(position) + ": " + reason),
        position_(position),
        reason_(reason) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t position_;
  std::string reason_;
};

}  // namespace masklink
