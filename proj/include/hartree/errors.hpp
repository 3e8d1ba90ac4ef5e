#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hartree {

enum class ErrorKind {
  InvalidInput,
  Usage,
  Domain,
  Truncation,
  Unsupported,
  ScaleOverflow,
  FitRefused,
  KernelTooWeak,
  ExperimentRefused,
  ConfigNotFound,
  Validation,
  AlreadyExists,
  Io,
  Runtime,
};

/// Machine-parsable tag for an error kind, e.g. "domain-error".
std::string_view error_tag(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace hartree
