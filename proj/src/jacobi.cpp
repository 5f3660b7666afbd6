#include "idft/jacobi.hpp"
#include "idft/error.hpp"

#include <cmath>
#include <string>

namespace idft {

namespace {

void check_counts(std::array<int, 2> counts, std::array<double, 2> masses) {
  if (counts[0] < 1 || counts[1] < 0 || counts[0] + counts[1] < 2)
    throw Error(ErrorKind::invalid_count, "need N1 >= 1, N2 >= 0 and N1 + N2 >= 2");
  if (!(masses[0] > 0) || (counts[1] > 0 && !(masses[1] > 0)))
    throw Error(ErrorKind::validation_error, "masses must be positive");
}

JacobiMap skeleton(MapKind kind, std::array<int, 2> counts, std::array<double, 2> masses) {
  JacobiMap m;
  m.kind = kind;
  m.counts = counts;
  for (int l = 0; l < 2; ++l)
    for (int i = 0; i < counts[std::size_t(l)]; ++i) {
      m.masses.push_back(masses[std::size_t(l)]);
      m.species.push_back(l);
    }
  for (double x : m.masses) m.total_mass += x;
  return m;
}

void finish(JacobiMap& m) {
  m.inverse = m.forward.inverse();
  // Metric of the conjugate momenta: forward M^{-1} forward^T is diag(1/M, 1/mu_a) for exact splits.
  if (m.reduced_masses.empty()) {
    Eigen::VectorXd inv_m(m.particles());
    for (int i = 0; i < m.particles(); ++i) inv_m(i) = 1.0 / m.masses[std::size_t(i)];
    const Eigen::MatrixXd g = m.forward * inv_m.asDiagonal() * m.forward.transpose();
    for (int a = 1; a < m.particles(); ++a) m.reduced_masses.push_back(1.0 / g(a, a));
  }
}

// Rows of per-species Jacobi coordinates for `count` equal-mass particles starting at column `first`.
void species_rows(Eigen::MatrixXd& f, int& row, int first, int count) {
  for (int a = 1; a < count; ++a, ++row) {
    for (int i = 0; i < a; ++i) f(row, first + i) = -1.0 / a;
    f(row, first + a) = 1.0;
  }
}

} // namespace

Eigen::MatrixXd jacobi_forward_matrix(const std::vector<double>& masses) {
  const int n = int(masses.size());
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
  double total = 0.0;
  for (double m : masses) total += m;
  for (int i = 0; i < n; ++i) f(0, i) = masses[std::size_t(i)] / total;
  double partial = 0.0;
  for (int a = 1; a < n; ++a) {
    partial += masses[std::size_t(a - 1)];
    for (int i = 0; i < a; ++i) f(a, i) = -masses[std::size_t(i)] / partial;
    f(a, a) = 1.0;
  }
  return f;
}

std::vector<double> reduced_masses(const JacobiMap& map) {
  if (map.kind != MapKind::standard) return map.reduced_masses;
  const int n1 = map.counts[0];
  const double m1 = n1 > 0 ? map.masses[0] : 0.0;
  const double m2 = map.counts[1] > 0 ? map.masses[std::size_t(n1)] : 0.0;
  const double big_m1 = n1 * m1;
  std::vector<double> mu;
  for (int a = 1; a < map.particles(); ++a) {
    if (a <= n1 - 1)
      mu.push_back(double(a) / double(a + 1) * m1);
    else
      mu.push_back((big_m1 + (a - n1) * m2) * m2 / (big_m1 + (a - n1 + 1) * m2));
  }
  return mu;
}

JacobiMap build_jacobi_map(std::array<int, 2> counts, std::array<double, 2> masses) {
  check_counts(counts, masses);
  JacobiMap m = skeleton(MapKind::standard, counts, masses);
  m.forward = jacobi_forward_matrix(m.masses);
  m.reduced_masses = reduced_masses(m);
  finish(m);
  return m;
}

AltJacobiMap build_alt_jacobi_map(std::array<int, 2> counts, std::array<double, 2> masses) {
  check_counts(counts, masses);
  JacobiMap m = skeleton(MapKind::alternative, counts, masses);
  const int n = m.particles(), n1 = counts[0], n2 = counts[1];
  m.forward = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) m.forward(0, i) = m.masses[std::size_t(i)] / m.total_mass;
  int row = 1;
  species_rows(m.forward, row, 0, n1);
  for (int a = 1; a < n1; ++a) m.reduced_masses.push_back(double(a) / double(a + 1) * masses[0]);
  species_rows(m.forward, row, n1, n2);
  for (int a = 1; a < n2; ++a) m.reduced_masses.push_back(double(a) / double(a + 1) * masses[1]);
  if (n2 > 0) {
    for (int i = 0; i < n1; ++i) m.forward(row, i) = -1.0 / n1;
    for (int i = 0; i < n2; ++i) m.forward(row, n1 + i) = 1.0 / n2;
    const double big1 = n1 * masses[0], big2 = n2 * masses[1];
    m.reduced_masses.push_back(big1 * big2 / (big1 + big2));
  }
  finish(m);
  return m;
}

JacobiMap heavy_mass_map(std::array<int, 2> counts, std::array<double, 2> masses) {
  check_counts(counts, masses);
  JacobiMap m = skeleton(MapKind::heavy, counts, masses);
  const int n = m.particles(), n1 = counts[0], n2 = counts[1];
  m.forward = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n1; ++i) m.forward(0, i) = 1.0 / n1;
  int row = 1;
  species_rows(m.forward, row, 0, n1);
  for (int a = 1; a < n1; ++a) m.reduced_masses.push_back(double(a) / double(a + 1) * masses[0]);
  for (int k = 0; k < n2; ++k, ++row) {
    for (int i = 0; i < n1; ++i) m.forward(row, i) = -1.0 / n1;
    m.forward(row, n1 + k) = 1.0;
    m.reduced_masses.push_back(masses[1]);
  }
  finish(m);
  return m;
}

InternalPoint to_internal(const JacobiMap& map, const std::vector<double>& lab) {
  if (int(lab.size()) != map.particles())
    throw Error(ErrorKind::dimension_mismatch, "expected " + std::to_string(map.particles()) + " coordinates");
  const Eigen::VectorXd y = map.forward * Eigen::Map<const Eigen::VectorXd>(lab.data(), Eigen::Index(lab.size()));
  InternalPoint p;
  p.R = y(0);
  p.xi.assign(y.data() + 1, y.data() + y.size());
  return p;
}

std::vector<double> from_internal(const JacobiMap& map, const InternalPoint& p) {
  if (int(p.xi.size()) != map.dims())
    throw Error(ErrorKind::dimension_mismatch, "expected " + std::to_string(map.dims()) + " internal coordinates");
  Eigen::VectorXd y(map.particles());
  y(0) = p.R;
  for (int a = 0; a < map.dims(); ++a) y(a + 1) = p.xi[std::size_t(a)];
  const Eigen::VectorXd x = map.inverse * y;
  return std::vector<double>(x.data(), x.data() + x.size());
}

InternalPoint to_internal_momenta(const JacobiMap& map, const std::vector<double>& lab_momenta) {
  if (int(lab_momenta.size()) != map.particles())
    throw Error(ErrorKind::dimension_mismatch, "expected " + std::to_string(map.particles()) + " momenta");
  const Eigen::VectorXd pi =
      map.inverse.transpose() *
      Eigen::Map<const Eigen::VectorXd>(lab_momenta.data(), Eigen::Index(lab_momenta.size()));
  InternalPoint p;
  p.R = pi(0);
  p.xi.assign(pi.data() + 1, pi.data() + pi.size());
  return p;
}

double kinetic_split_residual(const JacobiMap& map, const std::vector<double>& lab_momenta) {
  const InternalPoint q = to_internal_momenta(map, lab_momenta);
  double lab = 0.0;
  for (int i = 0; i < map.particles(); ++i)
    lab += lab_momenta[std::size_t(i)] * lab_momenta[std::size_t(i)] / (2.0 * map.masses[std::size_t(i)]);
  double internal = q.R * q.R / (2.0 * map.total_mass);
  for (int a = 0; a < map.dims(); ++a)
    internal += q.xi[std::size_t(a)] * q.xi[std::size_t(a)] / (2.0 * map.reduced_masses[std::size_t(a)]);
  return std::abs(lab - internal);
}

} // namespace idft
