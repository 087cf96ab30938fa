#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hubspoke {

/// Failure categories shared by the library, the CLI exit codes and the
/// HTTP error mapping.
enum class ErrorCode {
  validation,
  not_found,
  conflict,
  infeasible,
  io,
  internal,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace hubspoke
