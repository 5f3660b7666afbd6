#pragma once

// Independent two-particle laboratory-grid solver used as a reference. Only Eigen is used here;
// nothing from the library under test.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <functional>
#include <vector>

namespace lab {

struct Ground {
  double x_min = 0, x_max = 0;
  int n = 0;
  double energy = 0;
  std::vector<double> psi; // psi[i * n + j] = Psi(x_i, y_j), sum |Psi|^2 h^2 = 1

  double h() const { return (x_max - x_min) / (n - 1); }
  double x(int i) const { return x_min + i * h(); }

  // Density of the first particle at the nodes.
  std::vector<double> first_density() const {
    std::vector<double> d(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) d[i] += psi[i * n + j] * psi[i * n + j] * h();
    return d;
  }
};

// Lowest state of -d_x^2/2m1 - d_y^2/2m2 + V(x, y) with fourth-order differences and zero
// boundary values, by shifted inverse iteration with a sparse LDL^T factorization.
inline Ground solve(double x_min, double x_max, int n, double m1, double m2,
                    const std::function<double(double, double)>& V, double shift) {
  Ground g;
  g.x_min = x_min;
  g.x_max = x_max;
  g.n = n;
  const double h = g.h();
  const double w[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
  const int N = n * n;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(N) * 9);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int p = i * n + j;
      trip.emplace_back(p, p, V(g.x(i), g.x(j)) - shift);
      for (int o = -2; o <= 2; ++o) {
        const double c = w[o + 2] / (h * h);
        if (i + o >= 0 && i + o < n) trip.emplace_back(p, (i + o) * n + j, -0.5 / m1 * c);
        if (j + o >= 0 && j + o < n) trip.emplace_back(p, i * n + j + o, -0.5 / m2 * c);
      }
    }
  Eigen::SparseMatrix<double> A(N, N);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(N);
  double last = 0.0;
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd y = ldlt.solve(x);
    y /= y.norm();
    const double ray = y.dot(A * y);
    x = y;
    if (it > 2 && std::abs(ray - last) < 1e-14 * (1 + std::abs(ray))) break;
    last = ray;
  }
  g.energy = x.dot(A * x) + shift;
  g.psi.assign(x.data(), x.data() + N);
  for (double& v : g.psi) v /= h;
  return g;
}

} // namespace lab
