#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fringekit {

enum class ErrorCode {
  InvalidArgument,
  ShapeMismatch,
  SingularTransform,
  Io,
  Format,
  EmptyDataset,
  NumericalFailure,
  Config,
};

std::string_view error_code_name(ErrorCode code);

/// Every failure surfaced by the library. `code()` is stable and is what the
/// CLI prints in its one-line error report.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fringekit
