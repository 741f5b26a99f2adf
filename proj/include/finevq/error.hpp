#pragma once

#include <stdexcept>
#include <string>

namespace finevq {

// Categories map onto CLI exit codes: missing input 2, validation 3,
// runtime 1.
enum class ErrorKind { kRuntime, kMissingInput, kValidation };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error MissingInput(const std::string& what) {
  return Error(ErrorKind::kMissingInput, what);
}
inline Error ValidationError(const std::string& what) {
  return Error(ErrorKind::kValidation, what);
}
inline Error RuntimeError(const std::string& what) {
  return Error(ErrorKind::kRuntime, what);
}

int ExitCode(ErrorKind kind);

}  // namespace finevq
