#pragma once

#include <stdexcept>
#include <string>

namespace facetag {

enum class ErrorCode {
  InvalidArgument,
  Parse,
  UnknownLabel,
  Validation,
  Io,
  Protocol,
  Timeout,
  MissingResponse,
  NonConvergence,
};

const char* error_code_name(ErrorCode code) noexcept;

// Every failure the core reports is an Error carrying a code; the C API maps
// the code onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace facetag
