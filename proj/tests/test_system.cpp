#include "idft/error.hpp"
#include "idft/system.hpp"

#include <doctest.h>

#include <string>

using namespace idft;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error");
  return ErrorKind::parse_error;
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

const char* kSample = R"(# two bosons and a light particle
species1.count = 2
species1.mass = 5
species2.count = 1
species2.statistics = fermion
u11.kind = soft_coulomb
u11.A = 0.5
u12.kind = gaussian
u12.A = -1
u12.s = 0.7
vint2.kind = harmonic_trap
vint2.k = 0.25
grid.xmin = -7
grid.xmax = 7
grid.n = 64
solver.stencil = 5
)";

} // namespace

TEST_CASE("config parses and round-trips") {
  const SystemSpec s = parse_config(kSample);
  CHECK(s.species[0].count == 2);
  CHECK(s.species[1].statistics == Statistics::fermion);
  CHECK(s.u12.s == doctest::Approx(0.7));
  CHECK(s.solver.stencil == 5);
  CHECK(parse_config(serialize_config(s)) == s);
}

TEST_CASE("parse errors name the line") {
  CHECK(kind_of("species1.count = 2\nspecies1.mass = heavy\n") == ErrorKind::parse_error);
  CHECK(message_of("species1.count = 2\nspecies1.mass = heavy\n").find("line 2") != std::string::npos);
  CHECK(kind_of("species1.count = 2\nnonsense\n") == ErrorKind::parse_error);
  CHECK(kind_of("species1.count = 2\nspecies1.count = 3\n") == ErrorKind::parse_error);
  CHECK(kind_of("planet.count = 2\n") == ErrorKind::parse_error);
  CHECK(kind_of("species1.count = 1.5\n") == ErrorKind::parse_error);
}

TEST_CASE("validation errors name the field") {
  CHECK(kind_of("species1.mass = -1\n") == ErrorKind::validation_error);
  CHECK(message_of("species1.mass = -1\n").find("species1.mass") != std::string::npos);
  CHECK(kind_of("grid.xmin = 1\ngrid.xmax = 0\n") == ErrorKind::validation_error);
  CHECK(kind_of("solver.stencil = 4\n") == ErrorKind::validation_error);
  CHECK(kind_of("u12.kind = gaussian\nu12.s = 0\n") == ErrorKind::validation_error);
  CHECK(is_validation(ErrorKind::parse_error));
  CHECK_FALSE(is_validation(ErrorKind::no_convergence));
}

TEST_CASE("potential shapes") {
  CHECK(eval_pair_potential({PairKind::gaussian, 2, 1, 1, 1}, 0.0) == doctest::Approx(2.0));
  CHECK(eval_pair_potential({PairKind::soft_coulomb, 1, 1, 0.5, 1}, 0.0) == doctest::Approx(2.0));
  CHECK(eval_pair_potential({PairKind::harmonic, 1, 1, 1, 3}, 2.0) == doctest::Approx(6.0));
  CHECK(eval_pair_potential({}, 1.0) == 0.0);
  CHECK(eval_internal_potential({InternalKind::harmonic_trap, 1, 1, 2}, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("species swap is an involution") {
  const SystemSpec s = parse_config(kSample);
  const SystemSpec w = swap_species(s);
  CHECK(w.species[0].count == 1);
  CHECK(w.vint[0].kind == InternalKind::harmonic_trap);
  CHECK(swap_species(w) == s);
}
