#include "idft/grid.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace idft;

namespace {

double gaussian_error(int order, long n) {
  const Grid1D g = make_grid(-8, 8, n);
  const GridFunction f = sample(g, [](double x) { return std::exp(-x * x / 2); });
  const GridFunction t = kinetic_apply(f, 1.0, order);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    const double x = g.x(i);
    const double exact = -0.5 * (x * x - 1) * std::exp(-x * x / 2);
    worst = std::max(worst, std::abs(t[i] - exact));
  }
  return worst;
}

} // namespace

TEST_CASE("stencil error falls with the expected order") {
  const double r3 = gaussian_error(3, 201) / gaussian_error(3, 401);
  const double r5 = gaussian_error(5, 201) / gaussian_error(5, 401);
  CHECK(std::log2(r3) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(std::log2(r5) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("kinetic operator is symmetric under the grid inner product") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  const Grid1D g = make_grid(-3, 2, 37);
  for (int order : {3, 5}) {
    GridFunction f(g), h(g);
    for (std::size_t i = 0; i < g.n; ++i) f[i] = nd(rng), h[i] = nd(rng);
    CHECK(dot(f, kinetic_apply(h, 1.7, order)) == doctest::Approx(dot(kinetic_apply(f, 1.7, order), h)).epsilon(1e-12));
  }
}

TEST_CASE("fourier transform is unitary and inverts") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  const Grid1D g = make_grid(-5, 5, 64);
  GridFunction f(g);
  for (std::size_t i = 0; i < g.n; ++i) f[i] = nd(rng);
  const ComplexGridFunction ft = fourier(f);
  double nk = 0.0;
  for (const auto& c : ft.values) nk += std::norm(c);
  nk *= ft.grid.spacing();
  CHECK(nk == doctest::Approx(dot(f, f)).epsilon(1e-12));
  const ComplexGridFunction back = inverse_fourier(ft, g);
  for (std::size_t i = 0; i < g.n; ++i) CHECK(back[i].real() == doctest::Approx(f[i]).epsilon(1e-10));
}

TEST_CASE("fourier of a gaussian is a gaussian with k = 0 at the centre index") {
  const Grid1D g = make_grid(-20, 20, 256);
  const GridFunction f = sample(g, [](double x) { return std::exp(-x * x / 2); });
  const ComplexGridFunction ft = fourier(f);
  const Grid1D k = momentum_grid(g);
  CHECK(k.x(g.n / 2) == doctest::Approx(0.0));
  for (std::size_t i = 100; i < 156; ++i)
    CHECK(std::abs(ft[i]) == doctest::Approx(std::exp(-k.x(i) * k.x(i) / 2)).epsilon(1e-8));
}

TEST_CASE("lowest states of the oscillator") {
  const Grid1D g = make_grid(-10, 10, 801);
  const GridFunction v = sample(g, [](double x) { return 0.5 * x * x; });
  const Eigenstates e = lowest_states(v, 1.0, 5, 4);
  REQUIRE(e.values.size() == 4);
  for (int n = 0; n < 4; ++n) CHECK(e.values[std::size_t(n)] == doctest::Approx(n + 0.5).epsilon(1e-6));
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b)
      CHECK(dot(e.vectors[a], e.vectors[b]) == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-9));
}

TEST_CASE("integration and distances") {
  const Grid1D g = make_grid(0, 1, 101);
  CHECK(integrate(sample(g, [](double x) { return x * x; })) == doctest::Approx(1.0 / 3).epsilon(1e-4));
  const GridFunction a = sample(g, [](double) { return 1.0; });
  CHECK(l1_distance(a, a) == 0.0);
}
