#pragma once

#include <stdexcept>
#include <string>

namespace tglm {

enum class ErrorKind {
  invalid_argument,  // caller violated a precondition
  parse,             // malformed input bytes
  data,              // well-formed input that cannot be modelled
  numeric,           // solver could not produce an answer
  version,           // unsupported serialized format
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tglm
