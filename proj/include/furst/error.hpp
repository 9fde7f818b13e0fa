#pragma once

#include <stdexcept>
#include <string>

namespace furst {

enum class ErrorKind {
  group_mismatch,
  overflow,
  domain,           // precondition violated by the caller
  window_exceeded,
  cap_exceeded,
  no_convergence,
  unsupported,
  config,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace furst
