#pragma once

#include <stdexcept>
#include <string>

namespace oiel {

// Failure categories. The C API maps each one onto a stable status code.
enum class ErrorCode {
  invalid_argument,
  domain,
  parse,
  truncation_violation,
  singular_design,
  separation,
  infeasible_constraint,
  degenerate_model,
  singular_information,
  unsupported,
  io,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace oiel
