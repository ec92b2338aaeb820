#pragma once

#include <stdexcept>
#include <string>

namespace goalnet {

enum class ErrorCode {
  InvalidArgument,  // malformed input or invariant violation
  NotFound,
  Conflict,         // stale version, or a change that would leave a net without an Admin
  AccessDenied,
  Config,           // missing or unusable configuration
  Parse,
  Runtime,          // interpreter or process failure
  Storage,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field = {})
      : std::runtime_error(message), code_(code), field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  /// Path to the offending field for document-shaped input, empty otherwise.
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

}  // namespace goalnet
