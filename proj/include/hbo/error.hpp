#pragma once

#include <stdexcept>
#include <string>

namespace hbo {

/// Failure categories. The CLI maps `Numerical` to exit code 1 and all
/// others to exit code 2.
enum class ErrorKind {
  InvalidHyperparameter,
  Spec,
  Numerical,
  Input,
  Parse,
  Degenerate,
  Domain,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace hbo
