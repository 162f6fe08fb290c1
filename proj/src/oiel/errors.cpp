#include "oiel/errors.hpp"

namespace oiel {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::domain: return "domain";
    case ErrorCode::parse: return "parse";
    case ErrorCode::truncation_violation: return "truncation_violation";
    case ErrorCode::singular_design: return "singular_design";
    case ErrorCode::separation: return "separation";
    case ErrorCode::infeasible_constraint: return "infeasible_constraint";
    case ErrorCode::degenerate_model: return "degenerate_model";
    case ErrorCode::singular_information: return "singular_information";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace oiel
