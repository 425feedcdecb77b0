#pragma once

#include <stdexcept>
#include <string>

namespace mtalk {

enum class ErrorKind {
  NotFound,
  WrongKind,
  AbstractInstantiation,  // E005
  Refused,                // model with errors handed to the VM
  Instantiation,
  Io,
  Parse,
  Duplicate,
  Collision,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Exception type for API-level failures. Model problems are reported as
/// Diagnostics instead and never thrown.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mtalk
