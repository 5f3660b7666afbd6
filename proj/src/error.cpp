#include "idft/error.hpp"

namespace idft {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::invalid_extent: return "invalid-extent";
  case ErrorKind::invalid_count: return "invalid-count";
  case ErrorKind::dimension_mismatch: return "dimension-mismatch";
  case ErrorKind::parse_error: return "parse-error";
  case ErrorKind::validation_error: return "validation-error";
  case ErrorKind::size_exceeded: return "size-exceeded";
  case ErrorKind::no_convergence: return "no-convergence";
  case ErrorKind::degenerate_ground_state: return "degenerate-ground-state";
  case ErrorKind::too_few_particles: return "too-few-particles";
  case ErrorKind::missing_species: return "missing-species";
  case ErrorKind::missing_oracle: return "missing-oracle";
  case ErrorKind::not_differentiable: return "not-differentiable";
  case ErrorKind::unstable_inversion: return "unstable-inversion";
  case ErrorKind::degenerate_fermi_level: return "degenerate-fermi-level";
  case ErrorKind::constraint_violation: return "constraint-violation";
  case ErrorKind::box_too_small: return "box-too-small";
  }
  return "unknown";
}

bool is_validation(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::invalid_extent:
  case ErrorKind::invalid_count:
  case ErrorKind::dimension_mismatch:
  case ErrorKind::parse_error:
  case ErrorKind::validation_error:
  case ErrorKind::size_exceeded:
  case ErrorKind::too_few_particles:
  case ErrorKind::missing_species:
  case ErrorKind::missing_oracle:
  case ErrorKind::not_differentiable:
  case ErrorKind::constraint_violation:
    return true;
  default:
    return false;
  }
}

} // namespace idft
