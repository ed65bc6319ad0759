#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace limbswap {

enum class ErrorCode {
  Range,
  Degenerate,
  Order,
  UnknownGenerator,
  BadParameter,
  TooShort,
  Parse,
  Schema,
  Invariant,
  UnsupportedFormat,
  DegenerateCloud,
  UnknownProsthesis,
  UnknownTask,
  BadConfig,
  Io,
};

std::string_view errorCodeName(ErrorCode code);

/// Single exception type for data errors; `code()` tells callers which contract failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(errorCodeName(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace limbswap
