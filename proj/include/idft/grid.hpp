#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace idft {

// Uniform grid with both endpoints included.
struct Grid1D {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t n = 8;

  double spacing() const { return (x_max - x_min) / double(n - 1); }
  double x(std::size_t i) const { return x_min + double(i) * spacing(); }
  bool operator==(const Grid1D&) const = default;
};

Grid1D make_grid(double x_min, double x_max, long n);

template <class T> struct BasicGridFunction {
  Grid1D grid;
  std::vector<T> values;

  BasicGridFunction() = default;
  explicit BasicGridFunction(const Grid1D& g) : grid(g), values(g.n, T{}) {}
  BasicGridFunction(const Grid1D& g, std::vector<T> v);

  std::size_t size() const { return values.size(); }
  T& operator[](std::size_t i) { return values[i]; }
  const T& operator[](std::size_t i) const { return values[i]; }
};

using GridFunction = BasicGridFunction<double>;
using ComplexGridFunction = BasicGridFunction<std::complex<double>>;

template <class F> GridFunction sample(const Grid1D& g, F&& f) {
  GridFunction out(g);
  for (std::size_t i = 0; i < g.n; ++i) out[i] = f(g.x(i));
  return out;
}

// Second-derivative stencil weights (offsets -w..w), scaled by 1/h^2.
std::vector<double> laplacian_stencil(int order, double h);

// -(1/2m) f'' with zero values outside the grid. order is 3 or 5.
GridFunction kinetic_apply(const GridFunction& f, double mass, int order = 3);

double integrate(const GridFunction& f);
double integrate(const ComplexGridFunction& f);

// Riemann inner product h * sum f g; the kinetic operator is symmetric under it.
double dot(const GridFunction& f, const GridFunction& g);

double l1_distance(const GridFunction& a, const GridFunction& b);

// Momentum grid paired with g: n points, spacing 2*pi/(n h), k = 0 at index n/2.
Grid1D momentum_grid(const Grid1D& g);

// f~(k) = (1/sqrt(2 pi)) integral f(x) exp(-i k x) dx, sampled on momentum_grid.
// Unitary between the Riemann measures h and dk.
ComplexGridFunction fourier(const GridFunction& f);
ComplexGridFunction fourier(const ComplexGridFunction& f);
ComplexGridFunction inverse_fourier(const ComplexGridFunction& ft, const Grid1D& position_grid);

// In-place tensor-grid transform with the same convention on every axis.
// data is row-major with axis 0 slowest.
void fourier_tensor(std::vector<std::complex<double>>& data, const std::vector<Grid1D>& axes,
                    bool inverse = false);

struct Eigenstates {
  std::vector<double> values;
  std::vector<GridFunction> vectors; // normalized with dot()
};

// Lowest `count` eigenpairs of -(1/2m) d^2/dx^2 + v on the grid (banded solver).
Eigenstates lowest_states(const GridFunction& v, double mass, int order, std::size_t count);

} // namespace idft
