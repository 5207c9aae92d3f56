#include "weyl/error.hpp"

namespace weyl {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::NotPositiveDefinite: return "not positive definite";
    case ErrorCode::DomainViolation: return "domain violation";
    case ErrorCode::NumericalFailure: return "numerical failure";
    case ErrorCode::DegenerateInput: return "degenerate input";
    case ErrorCode::ReconstructionFailed: return "reconstruction failed";
  }
  return "unknown error";
}

}  // namespace weyl
