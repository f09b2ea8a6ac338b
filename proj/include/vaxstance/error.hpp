// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace vaxstance {

/// Coarse failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kGeneric,
  kMissingInput,   // a required file or directory does not exist
  kValidation,     // input parsed but violates a contract
  kRetryable,      // transient: quota, timeout, 5xx
  kUnavailable,    // remote endpoint unreachable after retries
  kConflict,       // state conflict (e.g. item already adjudicated)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error validation_error(const std::string& what) {
  return Error(ErrorKind::kValidation, what);
}

inline Error missing_input(const std::string& what) {
  return Error(ErrorKind::kMissingInput, what);
}

}  // namespace vaxstance
