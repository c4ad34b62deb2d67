#include "tfe/error.hpp"

namespace tfe {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_grid: return "invalid-grid";
    case ErrorKind::invalid_profile: return "invalid-profile";
    case ErrorKind::out_of_domain: return "out-of-domain";
    case ErrorKind::under_resolved: return "under-resolved";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::unsupported_range: return "unsupported-range";
    case ErrorKind::singular_weight: return "singular-weight";
    case ErrorKind::hypothesis_violated: return "hypothesis-violated";
    case ErrorKind::domain_exhausted: return "domain-exhausted";
    case ErrorKind::run_failed: return "run-failed";
    case ErrorKind::insufficient_resolution: return "insufficient-resolution";
    case ErrorKind::no_fit: return "no-fit";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace tfe
