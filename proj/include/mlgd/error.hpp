#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mlgd {

enum class ErrorKind {
  kSymmetryViolation,
  kNotSpd,
  kManifoldViolation,
  kFormat,
  kDegenerateInput,
  kConfiguration,
  kDegeneratePatch,
  kDegenerateRegion,
  kDegenerateDescriptor,
  kInsufficientData,
  kNumerical,
  kContract,
  kProtocol,
  kIo,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a category so that the CLI
/// can report it and pick an exit code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mlgd
