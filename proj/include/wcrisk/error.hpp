#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wcrisk {

enum class ErrorKind {
  invalid_input,
  not_contractive,
  infeasible_alpha,
  infeasible_radius,
  wrong_kind,
  io,
};

std::string_view to_string(ErrorKind kind);

/// Exception type thrown by every operation in the library. The kind is what
/// callers dispatch on (the CLI maps it to an exit code).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace wcrisk
