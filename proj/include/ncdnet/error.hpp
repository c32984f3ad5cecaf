#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ncdnet {

enum class Errc {
  InputTooLarge,
  CorruptStream,
  EmptyInput,
  DegenerateCompression,
  LengthMismatch,
  TooSmall,
  InvalidMatrix,
  NonIntegerOutput,
  FilterTooLarge,
  ShapeMismatch,
  BadRate,
  BadSigma,
  NotSymmetric,
  NoConvergence,
  BadK,
  BadFormat,
  IoFailure,
  BadWindow,
  BadParams,
  EmptyClass,
  DegenerateData,
  TooFewSizes,
  BadConfig,
};

std::string_view to_string(Errc code) noexcept;

/// All library failures surface as this exception; `code()` identifies the
/// condition, `what()` carries context (indices, file names).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ncdnet
