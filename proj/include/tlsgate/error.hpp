#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tlsgate {

enum class ErrorCode {
  kParse,
  kValidation,
  kConfiguration,
  kNormalization,
  kDuplicate,
  kNotFound,
  kReplay,
  kState,
  kSchemaVersion,
  kIo,
  kContract,
  kTransport,
};

std::string_view to_string(ErrorCode code);

// Single exception type for every recoverable failure in the library.
// Callers dispatch on code(); what() carries a human-readable reason.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tlsgate
