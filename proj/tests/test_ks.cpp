#include "idft/error.hpp"
#include "idft/ks.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace idft;

namespace {

SystemSpec trapped(int count, Statistics st) {
  SystemSpec s;
  s.species[0] = {"1", count, 1.0, st};
  s.vint[0] = {InternalKind::harmonic_trap, 1, 1, 1};
  s.grid = {-10, 10, 401};
  s.solver.stencil = 5;
  s.solver.tol = 1e-11;
  return s;
}

ErrorKind error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::parse_error;
}

} // namespace

TEST_CASE("hartree potential of a gaussian density matches the closed form") {
  const Grid1D g = make_grid(-15, 15, 601);
  const double sig2 = 0.8, s2 = 0.5;
  const GridFunction rho = sample(g, [&](double x) { return 2 * std::exp(-x * x / (2 * sig2)) / std::sqrt(2 * std::numbers::pi * sig2); });
  const GridFunction v = hartree_potential(rho, {PairKind::gaussian, 1.5, std::sqrt(s2), 1, 1});
  for (std::size_t i = 200; i <= 400; i += 25) {
    const double x = g.x(i);
    CHECK(v[i] == doctest::Approx(2 * 1.5 * std::sqrt(s2 / (sig2 + s2)) * std::exp(-x * x / (2 * (sig2 + s2)))).epsilon(1e-9));
  }
}

TEST_CASE("free bosons in a unit trap condense at epsilon = 1/2") {
  const KSState st = scf_solve(trapped(3, Statistics::boson), functional_from_name("hartree"));
  CHECK(st.converged);
  CHECK(st.species[0].eigenvalues[0] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(integrate(st.species[0].rho) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("free fermions fill the oscillator ladder") {
  const KSState st = scf_solve(trapped(2, Statistics::fermion), functional_from_name("hartree"));
  CHECK(st.species[0].eigenvalues[0] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(st.species[0].eigenvalues[1] == doctest::Approx(1.5).epsilon(1e-6));
  const EnergyBreakdown e = ks_energy(st, functional_from_name("hartree"), trapped(2, Statistics::fermion));
  CHECK(e.total == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("self-interaction correction removes the Hartree term for one particle") {
  SystemSpec s = trapped(1, Statistics::boson);
  s.u11 = {PairKind::soft_coulomb, 1, 1, 1, 1};
  const FunctionalSpec f = functional_from_name("sic");
  const KSState st = scf_solve(s, f);
  CHECK(st.species[0].eigenvalues[0] == doctest::Approx(0.5).epsilon(1e-7));
  const EnergyBreakdown e = ks_energy(st, f, s);
  CHECK(e.hartree[0] + e.xc_interaction[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("property: sic potential is the derivative of the sic energy") {
  SystemSpec s = trapped(2, Statistics::fermion);
  s.u11 = {PairKind::gaussian, 1, 1, 1, 1};
  s.grid = {-8, 8, 161};
  const FunctionalSpec f = functional_from_name("sic");
  KSState st = scf_solve(s, functional_from_name("hartree"));
  const GridFunction v = xc_potential(f, st, s, 0, 1);
  for (double c : {-1.0, 0.3, 2.0}) {
    const GridFunction eta = sample(st.grid, [&](double x) { return std::exp(-(x - c) * (x - c)); });
    const double eps = 1e-5;
    auto energy = [&](double t) {
      KSState p = st;
      for (std::size_t k = 0; k < eta.size(); ++k) p.species[0].orbitals[1][k] += t * eta[k];
      return xc_energy(f, p, s).interaction[0];
    };
    const double fd = (energy(eps) - energy(-eps)) / (2 * eps);
    double an = 0.0;
    const auto& phi = st.species[0].orbitals[1];
    for (std::size_t k = 0; k < eta.size(); ++k) an += 2 * phi[k] * eta[k] * v[k];
    an *= st.grid.spacing();
    CHECK(fd == doctest::Approx(an).epsilon(1e-6));
  }
}

TEST_CASE("a constant shift of the potential shifts eigenvalues and leaves the density") {
  SystemSpec s = trapped(2, Statistics::boson);
  s.u11 = {PairKind::soft_coulomb, 0.5, 1, 1, 1};
  const FunctionalSpec f = functional_from_name("hartree");
  ScfOptions a = ScfOptions::from(s), b = a;
  b.external[0] = sample(s.grid.grid(), [](double) { return 0.75; });
  const KSState x = scf_solve(s, f, a), y = scf_solve(s, f, b);
  CHECK(y.species[0].eigenvalues[0] - x.species[0].eigenvalues[0] == doctest::Approx(0.75).epsilon(1e-8));
  CHECK(l1_distance(x.species[0].rho, y.species[0].rho) <= 1e-8);
}

TEST_CASE("mixing parameter changes the path but not the fixed point") {
  SystemSpec s = trapped(2, Statistics::boson);
  s.u11 = {PairKind::soft_coulomb, 1, 1, 1, 1};
  const FunctionalSpec f = functional_from_name("hartree");
  ScfOptions a = ScfOptions::from(s), b = a;
  a.mix = 0.3;
  b.mix = 1.0;
  const KSState x = scf_solve(s, f, a), y = scf_solve(s, f, b);
  CHECK(l1_distance(x.species[0].rho, y.species[0].rho) <= 1e-8);
  CHECK(x.iterations != y.iterations);
}

TEST_CASE("exact-oracle energy closes on the exact energy without internal potentials") {
  SystemSpec s;
  s.species[0] = {"1", 2, 1.0, Statistics::boson};
  s.u11 = {PairKind::harmonic, 1, 1, 1, 1};
  s.grid = {-8, 8, 161};
  s.solver.tol = 1e-10;
  const InternalWavefunction psi = solve_ground(build_internal_hamiltonian(s, build_jacobi_map(s.counts(), s.masses())));
  const ExactOracle oracle = make_oracle(psi);
  const KSState st = scf_solve(s, functional_from_name("hartree"));
  const EnergyBreakdown e = ks_energy(st, functional_from_name("exact-oracle", &oracle), s);
  CHECK(e.total == doctest::Approx(psi.energy).epsilon(1e-10));
}

TEST_CASE("functional validation") {
  CHECK(error_of([] { functional_from_name("lda"); }) == ErrorKind::validation_error);
  CHECK(error_of([] { validate(functional_from_name("exact-oracle")); }) == ErrorKind::missing_oracle);
  FunctionalSpec bad;
  bad.coupling = Channel::sic;
  CHECK(error_of([&] { validate(bad); }) == ErrorKind::validation_error);
  SystemSpec s = trapped(1, Statistics::boson);
  const ExactOracle o;
  CHECK(error_of([&] { scf_solve(s, functional_from_name("exact-oracle", &o)); }) == ErrorKind::not_differentiable);
}

TEST_CASE("iteration cap reports no-convergence") {
  SystemSpec s = trapped(2, Statistics::boson);
  s.u11 = {PairKind::soft_coulomb, 1, 1, 1, 1};
  s.solver.max_iter = 2;
  CHECK(error_of([&] { scf_solve(s, functional_from_name("hartree")); }) == ErrorKind::no_convergence);
}

TEST_CASE("inversion of a harmonic ground density recovers the trap") {
  const Grid1D g = make_grid(-6, 6, 241);
  const double w = 1.3;
  const GridFunction rho = sample(g, [&](double x) { return 2 * std::sqrt(w / std::numbers::pi) * std::exp(-w * x * x); });
  const InversionResult r = invert_ks_single_orbital(rho, 1.0, 3);
  const std::size_t mid = g.n / 2;
  for (std::size_t i = 60; i <= 180; i += 20) {
    const double x = g.x(i);
    CHECK(r.potential[i] - r.potential[mid] == doctest::Approx(0.5 * w * w * x * x).epsilon(2e-3));
  }
  CHECK(l1_distance(ground_density(r.potential, 1.0, 2.0, 3), rho) <= 1e-6);
}

TEST_CASE("inversion refuses a density with an interior node") {
  const Grid1D g = make_grid(-5, 5, 101);
  const GridFunction rho = sample(g, [](double x) { return x * x * std::exp(-x * x); });
  CHECK(error_of([&] { invert_ks_single_orbital(rho, 1.0); }) == ErrorKind::unstable_inversion);
}
