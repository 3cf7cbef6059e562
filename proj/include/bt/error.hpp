#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bt {

enum class ErrorKind {
  NotSelfAdjoint,
  NoConvergence,
  Degenerate,
  DimensionMismatch,
  NoSymmetricSolution,
  NotPositiveDefinite,
  TooFewSamples,
  EvaluationFailure,
  SingularFrame,
  SingularGauge,
  SignatureNotConstant,
  NotPseudoIsometry,
  ParseError,
  ValidationError,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bt
