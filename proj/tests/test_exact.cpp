#include "idft/error.hpp"
#include "idft/exact.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace idft;

namespace {

SystemSpec pair_spec(Statistics st, long n = 201) {
  SystemSpec s;
  s.species[0] = {"1", 2, 1.0, st};
  s.u11 = {PairKind::harmonic, 1, 1, 1, 1};
  s.grid = {-8, 8, n};
  s.solver.stencil = 5;
  return s;
}

SystemSpec two_plus_one() {
  SystemSpec s;
  s.species[0] = {"1", 2, 1.0, Statistics::boson};
  s.species[1] = {"2", 1, 2.0, Statistics::boson};
  s.u11 = {PairKind::soft_coulomb, 0.5, 1, 1, 1};
  s.u12 = {PairKind::harmonic, 1, 1, 1, 1};
  s.vint[1] = {InternalKind::harmonic_trap, 1, 1, 0.5};
  s.grid = {-8, 8, 64};
  return s;
}

InternalWavefunction solve(const SystemSpec& s) {
  return solve_ground(build_internal_hamiltonian(s, build_jacobi_map(s.counts(), s.masses())));
}

ErrorKind solve_error(const SystemSpec& s) {
  try {
    solve(s);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::parse_error;
}

} // namespace

TEST_CASE("fermion pair in a harmonic bond sits at 3 omega / 2") {
  const InternalWavefunction psi = solve(pair_spec(Statistics::fermion));
  CHECK(psi.energy == doctest::Approx(1.5 * std::sqrt(2.0)).epsilon(1e-6));
  CHECK(psi.sector_weight == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("boson pair in a harmonic bond sits at omega / 2") {
  const InternalWavefunction psi = solve(pair_spec(Statistics::boson));
  CHECK(psi.energy == doctest::Approx(0.5 * std::sqrt(2.0)).epsilon(1e-5));
  double norm = 0.0;
  for (double a : psi.amplitudes) norm += a * a;
  CHECK(norm * psi.tensor().cell() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("property: internal Hamiltonian is symmetric") {
  const SystemSpec s = two_plus_one();
  const InternalHamiltonian H = build_internal_hamiltonian(s, build_jacobi_map(s.counts(), s.masses()));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 5; ++t) {
    std::vector<double> x(H.size()), y(H.size()), hx, hy;
    for (auto& v : x) v = nd(rng);
    for (auto& v : y) v = nd(rng);
    H.apply(x, hx);
    H.apply(y, hy);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) a += x[i] * hy[i], b += hx[i] * y[i];
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("property: symmetry projection is idempotent") {
  const SystemSpec s = two_plus_one();
  const JacobiMap map = build_jacobi_map(s.counts(), s.masses());
  const std::vector<Grid1D> axes(2, s.grid.grid());
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  for (Statistics st : {Statistics::boson, Statistics::fermion}) {
    std::vector<double> x(axes[0].n * axes[1].n);
    for (auto& v : x) v = nd(rng);
    const auto p1 = symmetry_project(x, axes, map, {st, Statistics::boson});
    const auto p2 = symmetry_project(p1, axes, map, {st, Statistics::boson});
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(p1[i] - p2[i]));
    CHECK(d <= 1e-12);
  }
}

TEST_CASE("densities normalize and gamma marginalizes to (N - 1) rho") {
  const InternalWavefunction psi = solve(two_plus_one());
  const GridFunction rho = internal_density(psi, 0);
  CHECK(integrate(rho) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(integrate(internal_density(psi, 1)) == doctest::Approx(1.0).epsilon(1e-10));
  const GridFunction m = pair_density(psi, 0).marginal();
  CHECK(l1_distance(m, rho) <= 1e-6);
  const Table2D g12 = coupling_pair_density(psi);
  CHECK(g12.integral() == doctest::Approx(2.0).epsilon(1e-8));
  for (std::size_t i = 0; i < g12.grid.n; ++i)
    for (std::size_t j = 0; j < i; ++j) CHECK(pair_density(psi, 0).at(i, j) == doctest::Approx(pair_density(psi, 0).at(j, i)));
}

TEST_CASE("momentum density: normalization, positivity and kinetic moment") {
  SystemSpec s = pair_spec(Statistics::boson, 128);
  s.solver.stencil = 5;
  const InternalWavefunction psi = solve(s);
  const GridFunction rp = momentum_density(psi, 0);
  CHECK(integrate(rp) == doctest::Approx(2.0).epsilon(1e-8));
  for (double v : rp.values) CHECK(v >= -1e-12);
  double t = 0.0;
  for (std::size_t i = 0; i < rp.size(); ++i) t += rp.grid.x(i) * rp.grid.x(i) / 2 * rp[i];
  t *= rp.grid.spacing();
  CHECK(t == doctest::Approx(species_kinetic_spectral(psi)[0]).epsilon(1e-6));
}

TEST_CASE("stencil and spectral kinetic energies agree on a resolved grid") {
  const InternalWavefunction psi = solve(pair_spec(Statistics::boson, 241));
  const double ts = interacting_kinetic(psi, KineticMethod::stencil);
  const double tf = interacting_kinetic(psi, KineticMethod::spectral);
  CHECK(ts == doctest::Approx(tf).epsilon(1e-6));
  // virial for the harmonic bond: T = E / 2
  CHECK(ts == doctest::Approx(psi.energy / 2).epsilon(1e-6));
  const auto per = species_kinetic(psi);
  CHECK(per[0] + per[1] == doctest::Approx(ts).epsilon(1e-10));
}

TEST_CASE("laboratory-frame integral with delta(R) matches the internal expectation") {
  const InternalWavefunction psi = solve(pair_spec(Statistics::boson, 64));
  const auto f = [](const std::vector<double>& r) { return std::exp(-(r[0] - r[1]) * (r[0] - r[1]) / 4); };
  CHECK(lab_frame_expectation(psi, f, 129) == doctest::Approx(direct_expectation(psi, f)).epsilon(1e-6));
}

TEST_CASE("one-body moment matches the direct sum over particles") {
  const InternalWavefunction psi = solve(two_plus_one());
  const auto v = [](double r) { return 0.25 * r * r; };
  const double direct = direct_expectation(psi, [&](const std::vector<double>& r) {
    return v(r[2]);
  });
  CHECK(one_body_moment(psi, 1, v) == doctest::Approx(direct).epsilon(1e-12));
  const EnergyBreakdown e = energy_breakdown_exact(psi);
  CHECK(e.vint[1] == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("coupling correlation vanishes without a coupling potential") {
  SystemSpec s = two_plus_one();
  s.u12 = {};
  s.vint[0] = {InternalKind::harmonic_trap, 1, 1, 1};
  const EnergyBreakdown e = energy_breakdown_exact(solve(s));
  CHECK(e.c12 == 0.0);
  CHECK(e.hartree12 == 0.0);
}

TEST_CASE("decomposition closes on the exact energy") {
  const InternalWavefunction psi = solve(two_plus_one());
  const EnergyBreakdown e = energy_breakdown_exact(psi);
  CHECK(e.ks_kinetic_symbolic);
  CHECK(e.total == doctest::Approx(psi.energy).epsilon(1e-10));
}

TEST_CASE("degenerate ground state is reported") {
  SystemSpec s;
  s.species[0] = {"1", 1, 1.0, Statistics::boson};
  s.species[1] = {"2", 1, 1.0, Statistics::boson};
  s.u12 = {PairKind::gaussian, 2000, 0.4, 1, 1};
  s.vint[0] = {InternalKind::harmonic_trap, 1, 1, 1};
  s.vint[1] = {InternalKind::harmonic_trap, 1, 1, 1};
  s.grid = {-8, 8, 161};
  CHECK(solve_error(s) == ErrorKind::degenerate_ground_state);
}

TEST_CASE("a box that clips the density is reported") {
  SystemSpec s = pair_spec(Statistics::boson, 41);
  s.grid = {-1.5, 1.5, 41};
  CHECK(solve_error(s) == ErrorKind::box_too_small);
}

TEST_CASE("counts outside 2..4 are rejected") {
  SystemSpec s = pair_spec(Statistics::boson, 16);
  s.species[0].count = 5;
  CHECK(solve_error(s) == ErrorKind::size_exceeded);
}

TEST_CASE("laboratory density of a narrow packet approaches the internal density") {
  const InternalWavefunction psi = solve(pair_spec(Statistics::boson, 128));
  const GridFunction rho = internal_density(psi, 0);
  const GridFunction lab = lab_density_convolve(rho, {0.0, 0.05, 0.0});
  CHECK(integrate(lab) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(l1_distance(lab, rho) <= 1e-2);
}
