#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace idft {

enum class MapKind { standard, alternative, heavy };

// Linear map from laboratory coordinates to (R, xi_1 .. xi_{N-1}).
// Particles are ordered species 1 first, then species 2.
struct JacobiMap {
  MapKind kind = MapKind::standard;
  std::array<int, 2> counts{0, 0};
  std::vector<double> masses;
  std::vector<int> species; // 0 or 1 per particle
  Eigen::MatrixXd forward;
  Eigen::MatrixXd inverse;
  std::vector<double> reduced_masses;
  double total_mass = 0.0;

  int particles() const { return int(masses.size()); }
  int dims() const { return particles() - 1; }
};

using AltJacobiMap = JacobiMap;

JacobiMap build_jacobi_map(std::array<int, 2> counts, std::array<double, 2> masses);

// Per-species Jacobi sets followed by R2 - R1 (when both species are present).
AltJacobiMap build_alt_jacobi_map(std::array<int, 2> counts, std::array<double, 2> masses);

// R = R1, species-1 Jacobi coordinates, light particles measured from R1 with mu = m2.
JacobiMap heavy_mass_map(std::array<int, 2> counts, std::array<double, 2> masses);

// Sequential Jacobi rows for an arbitrary mass list: xi_a = r_{a+1} - (sum_{i<=a} m_i r_i)/(sum_{i<=a} m_i).
// Only the leading mass must be positive, so a massless trailing particle is allowed.
Eigen::MatrixXd jacobi_forward_matrix(const std::vector<double>& masses);

// Reduced masses in the two closed forms (species-1 branch and mixed branch).
std::vector<double> reduced_masses(const JacobiMap& map);

struct InternalPoint {
  double R = 0.0;
  std::vector<double> xi;
};

InternalPoint to_internal(const JacobiMap& map, const std::vector<double>& lab);
std::vector<double> from_internal(const JacobiMap& map, const InternalPoint& p);

// Conjugate momenta (P, tau) = forward^{-T} p.
InternalPoint to_internal_momenta(const JacobiMap& map, const std::vector<double>& lab_momenta);

// |sum p^2/2m - P^2/2M - sum tau^2/2mu|.
double kinetic_split_residual(const JacobiMap& map, const std::vector<double>& lab_momenta);

} // namespace idft
