#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tfe {

/// Failure categories raised across the library. Recoverable solver
/// outcomes (rejected steps) are reported through StepStatus instead.
enum class ErrorKind {
  invalid_grid,
  invalid_profile,
  out_of_domain,
  under_resolved,
  invalid_argument,
  unsupported_range,
  singular_weight,
  hypothesis_violated,
  domain_exhausted,
  run_failed,
  insufficient_resolution,
  no_fit,
  config,
  io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tfe
