#include "idft/error.hpp"
#include "idft/limits.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace idft;

namespace {

SystemSpec heavy_light() {
  SystemSpec s;
  s.species[0] = {"1", 2, 1000.0, Statistics::boson};
  s.species[1] = {"2", 1, 1.0, Statistics::boson};
  s.u11 = {PairKind::soft_coulomb, 1, 1, 0.3, 1};
  s.u12 = {PairKind::gaussian, -2, 1, 1, 1};
  s.grid = {-10, 10, 201};
  return s;
}

} // namespace

TEST_CASE("slope fit and monotonicity helpers") {
  const std::vector<double> x{1, 10, 100, 1000};
  CHECK(fit_loglog_slope(x, {5, 0.5, 0.05, 0.005}) == doctest::Approx(-1.0));
  CHECK(fit_loglog_slope(x, {1, 100, 1e4, 1e6}) == doctest::Approx(2.0));
  CHECK(strictly_decreasing({3, 2, 1}));
  CHECK_FALSE(strictly_decreasing({3, 3, 1}));
}

TEST_CASE("property: full and heavy maps differ by O(m/M)") {
  for (double M : {10.0, 100.0, 1000.0, 1e4}) {
    const JacobiMap full = build_jacobi_map({2, 1}, {M, 1.0});
    const JacobiMap heavy = heavy_mass_map({2, 1}, {M, 1.0});
    const double d = (full.forward - heavy.forward).cwiseAbs().maxCoeff();
    CHECK(d * M == doctest::Approx(1.0).epsilon(0.6));
  }
}

TEST_CASE("one clamped heavy particle binds the light one with omega / 2") {
  SystemSpec s;
  s.species[0] = {"1", 1, 1e6, Statistics::boson};
  s.species[1] = {"2", 1, 1.0, Statistics::boson};
  s.u12 = {PairKind::harmonic, 1, 1, 1, 1};
  s.grid = {-10, 10, 401};
  s.solver.stencil = 5;
  const ClampedPoint cp = clamped_nuclei_solve(s, {0.0}, functional_from_name("hartree"));
  CHECK(cp.light_energy == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(cp.total == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("clamped positions off the centre of mass are rejected") {
  try {
    clamped_nuclei_solve(heavy_light(), {1.0, 0.5}, functional_from_name("hartree"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::constraint_violation);
  }
}

TEST_CASE("clamped diatomic scan has a single minimum") {
  const SystemSpec s = heavy_light();
  std::vector<double> e;
  for (double d = 0.5; d <= 3.5; d += 0.25) e.push_back(clamped_nuclei_solve(s, {-d / 2, d / 2}, functional_from_name("hartree")).total);
  int minima = 0;
  for (std::size_t i = 1; i + 1 < e.size(); ++i) minima += e[i] < e[i - 1] && e[i] < e[i + 1];
  CHECK(minima == 1);
  CHECK(e.front() > *std::min_element(e.begin(), e.end()));
}

TEST_CASE("property: localized pieces sum to the density and carry one particle each") {
  const Grid1D g = make_grid(-6, 6, 241);
  for (int n = 1; n <= 4; ++n) {
    const GridFunction rho = sample(g, [&](double x) { return n * std::exp(-x * x / 2) / std::sqrt(2 * M_PI); });
    const auto pieces = localized_densities(rho, n);
    GridFunction sum(g);
    for (const auto& p : pieces) {
      double w = 0.0;
      for (std::size_t i = 0; i < g.n; ++i) {
        sum[i] += p[i];
        w += ((i == 0 || i + 1 == g.n) ? 0.5 : 1.0) * g.spacing() * p[i];
      }
      CHECK(w == doctest::Approx(1.0).epsilon(1e-8));
    }
    CHECK(l1_distance(sum, rho) <= 1e-12);
  }
}

TEST_CASE("harmonic pair: kinetic correlation equals -3 omega / 4") {
  SystemSpec s;
  s.species[0] = {"1", 2, 1.0, Statistics::boson};
  s.u11 = {PairKind::harmonic, 1, 1, 1, 1};
  // bins coarser than the mapped samples (r = xi / 2) keep the deposited density smooth
  s.grid = {-6, 6, 241};
  s.solver.stencil = 5;
  const LimitReport r = classical_limit_sweep(s, {1.0, 4.0}, [](const SystemSpec&, const JacobiMap&) {
    return std::vector<Grid1D>{make_grid(-10, 10, 801)};
  });
  for (std::size_t i = 0; i < 2; ++i) {
    const double omega = std::sqrt(r.values[i] / 0.5);
    CHECK(r.rows[i][1] == doctest::Approx(-0.75 * omega).epsilon(1e-2));
  }
  CHECK(r.monotone[1] == 1);
}

TEST_CASE("sweeps reject non-increasing parameters") {
  try {
    coupling_sweep(heavy_light(), {0.2, 0.1});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::validation_error);
  }
}
