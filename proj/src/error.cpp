#include "bt/error.hpp"

namespace bt {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotSelfAdjoint: return "NotSelfAdjoint";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NoSymmetricSolution: return "NoSymmetricSolution";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::EvaluationFailure: return "EvaluationFailure";
    case ErrorKind::SingularFrame: return "SingularFrame";
    case ErrorKind::SingularGauge: return "SingularGauge";
    case ErrorKind::SignatureNotConstant: return "SignatureNotConstant";
    case ErrorKind::NotPseudoIsometry: return "NotPseudoIsometry";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

}  // namespace bt
