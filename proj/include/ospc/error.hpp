#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ospc {

enum class ErrorKind {
  kInvalidInput,
  kDegeneratePolicy,   // selection probability is zero
  kUnattainableDelay,
  kNoConvergence,
  kTooLarge,
  kDominanceViolation,
  kUnboundedSupport,
  kConfigInvalid,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kDegeneratePolicy: return "degenerate-policy";
    case ErrorKind::kUnattainableDelay: return "unattainable-delay";
    case ErrorKind::kNoConvergence: return "no-convergence";
    case ErrorKind::kTooLarge: return "too-large";
    case ErrorKind::kDominanceViolation: return "dominance-violation";
    case ErrorKind::kUnboundedSupport: return "unbounded-support";
    case ErrorKind::kConfigInvalid: return "config-invalid";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace ospc
