#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace idft {

enum class ErrorKind {
  invalid_extent,
  invalid_count,
  dimension_mismatch,
  parse_error,
  validation_error,
  size_exceeded,
  no_convergence,
  degenerate_ground_state,
  too_few_particles,
  missing_species,
  missing_oracle,
  not_differentiable,
  unstable_inversion,
  degenerate_fermi_level,
  constraint_violation,
  box_too_small,
};

std::string_view to_string(ErrorKind kind);

// True for errors caused by bad input rather than by a numerical failure.
bool is_validation(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace idft
