#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace artss {

enum class ErrorKind {
  kValidation,
  kParse,
  kSchema,
  kProtocol,
  kEstimation,
  kThreshold,
  kRefinement,
  kPairing,
  kAmbiguity,
  kPooling,
  kConditioning,
  kIo,
};

std::string_view error_kind_name(ErrorKind kind);

// Single exception type for the library. `kind` lets callers (and the CLI's
// JSON error output) distinguish failure classes without a type hierarchy.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace artss
