#pragma once

#include "idft/energy.hpp"
#include "idft/grid.hpp"
#include "idft/jacobi.hpp"
#include "idft/system.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <optional>
#include <vector>

namespace idft {

// Row-major tensor product of 1D grids, axis 0 slowest.
struct TensorGrid {
  std::vector<Grid1D> axes;
  std::vector<std::size_t> strides;
  std::size_t size = 0;

  TensorGrid() = default;
  explicit TensorGrid(std::vector<Grid1D> a);
  std::size_t dims() const { return axes.size(); }
  std::size_t index(std::size_t point, std::size_t axis) const { return (point / strides[axis]) % axes[axis].n; }
  double coordinate(std::size_t point, std::size_t axis) const { return axes[axis].x(index(point, axis)); }
  double cell() const; // product of spacings
};

// Interaction pieces at one configuration of c.m.-frame positions.
struct PotentialTerms {
  std::array<double, 2> intra{}; // sum over pairs i<j within a species
  double coupling = 0.0;         // sum over inter-species pairs
  std::array<double, 2> vint{};  // sum of internal potentials over each species
  double total() const { return intra[0] + intra[1] + coupling + vint[0] + vint[1]; }
};

PotentialTerms potential_terms(const SystemSpec& spec, const std::vector<int>& species,
                               const std::vector<double>& positions);

// Sum_a tau_a^2/2mu_a + U + V_int on the xi tensor grid, applied matrix-free.
class InternalHamiltonian {
public:
  InternalHamiltonian(const SystemSpec& spec, const JacobiMap& map, std::vector<Grid1D> axes, int stencil);

  const SystemSpec& spec() const { return spec_; }
  const JacobiMap& map() const { return map_; }
  const TensorGrid& tensor() const { return tensor_; }
  int stencil() const { return stencil_; }
  std::size_t size() const { return tensor_.size; }
  const std::vector<double>& potential() const { return potential_; }

  void apply(const std::vector<double>& x, std::vector<double>& y) const;
  void apply_kinetic(const std::vector<double>& x, std::vector<double>& y) const;

  // Positions r_i - R at a grid point.
  std::vector<double> positions(std::size_t point) const;
  // Rows: particles; columns: xi axes. r_i - R = sum_a C(i, a) xi_a.
  const Eigen::MatrixXd& position_coefficients() const { return coef_; }

private:
  SystemSpec spec_;
  JacobiMap map_;
  TensorGrid tensor_;
  int stencil_;
  Eigen::MatrixXd coef_;
  std::vector<double> potential_;
};

// Uses spec.grid on every axis and spec.solver.stencil.
InternalHamiltonian build_internal_hamiltonian(const SystemSpec& spec, const JacobiMap& map);
InternalHamiltonian build_internal_hamiltonian(const SystemSpec& spec, const JacobiMap& map,
                                               std::vector<Grid1D> axes);

// Same-species permutations acting on xi as forward * perm * inverse.
struct SymmetryGroup {
  std::vector<Eigen::MatrixXd> actions;
  std::vector<double> characters; // +1, or the permutation sign for fermions
  bool aligned = false;           // every action maps grid nodes onto grid nodes
  std::vector<std::vector<std::size_t>> index_maps; // filled when aligned
};

// species = -1 uses both species.
SymmetryGroup build_symmetry(const JacobiMap& map, const std::array<Statistics, 2>& stats,
                             const std::vector<Grid1D>& axes, int species = -1);

// psi(A xi) with multilinear interpolation (or index lookup when aligned); zero outside the grid.
std::vector<double> apply_group_element(const std::vector<double>& amps, const SymmetryGroup& group,
                                        std::size_t element, const TensorGrid& tensor);

std::vector<double> symmetry_project(const std::vector<double>& amps, const SymmetryGroup& group,
                                     const TensorGrid& tensor);
std::vector<double> symmetry_project(const std::vector<double>& amps, const std::vector<Grid1D>& grids,
                                     const JacobiMap& map, const std::array<Statistics, 2>& stats,
                                     int species = -1);

struct InternalWavefunction {
  SystemSpec spec;
  JacobiMap map;
  std::vector<Grid1D> grids;
  std::vector<double> amplitudes; // real; sum |psi|^2 * cell = 1
  double energy = 0.0;            // Rayleigh quotient
  double residual = 0.0;
  double sector_weight = 0.0;     // <psi|P psi> for the statistics projector
  double symmetry_defect = 0.0;   // max_g |O_g psi - chi_g psi| / max |psi|
  double next_energy = 0.0;       // next state in the same sector (NaN when not computed)
  double edge_density = 0.0;      // max |psi|^2 on the boundary relative to the peak
  std::size_t matvecs = 0;
  int stencil = 3;

  TensorGrid tensor() const { return TensorGrid(grids); }
};

struct SolveOptions {
  double tol = 1e-9;
  double degeneracy_tol = 1e-6;
  bool check_degeneracy = true;
  double edge_tol = 1e-10; // negative disables the box-size check
  std::size_t max_states = 16;
  unsigned long seed = 20240611;
};

InternalWavefunction solve_ground(const InternalHamiltonian& H, const SolveOptions& opt = {});

// Two-variable table on a square grid, values[i * n + j] = T(x_i, x_j).
struct Table2D {
  Grid1D grid;
  std::vector<double> values;

  Table2D() = default;
  explicit Table2D(const Grid1D& g) : grid(g), values(g.n * g.n, 0.0) {}
  double& at(std::size_t i, std::size_t j) { return values[i * grid.n + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * grid.n + j]; }
  double integral() const;                 // trapezoid in both variables
  GridFunction marginal() const;           // integral over the second variable
};

struct DensitySet {
  std::array<std::optional<GridFunction>, 2> rho;
  std::array<std::optional<Table2D>, 2> gamma;
  std::optional<Table2D> gamma12;
  std::array<std::optional<GridFunction>, 2> rho_p;
};

// Cloud-in-cell deposits; return the weight that fell outside the grid.
double deposit_cic(std::vector<double>& bins, const Grid1D& g, double x, double w);
double deposit_cic(Table2D& t, double x, double y, double w);
// Three-point deposit preserving zeroth, first and second moments.
double deposit_quadratic(std::vector<double>& bins, const Grid1D& g, double x, double w);

GridFunction internal_density(const InternalWavefunction& psi, int l);
GridFunction internal_density(const InternalWavefunction& psi, int l, const Grid1D& r_grid);
Table2D pair_density(const InternalWavefunction& psi, int l);
Table2D pair_density(const InternalWavefunction& psi, int l, const Grid1D& r_grid);
Table2D coupling_pair_density(const InternalWavefunction& psi);
Table2D coupling_pair_density(const InternalWavefunction& psi, const Grid1D& r_grid);
GridFunction momentum_density(const InternalWavefunction& psi, int l);
GridFunction momentum_density(const InternalWavefunction& psi, int l, const Grid1D& p_grid);
DensitySet compute_densities(const InternalWavefunction& psi, const Grid1D& r_grid);

enum class KineticMethod { stencil, spectral };
double interacting_kinetic(const InternalWavefunction& psi, KineticMethod method = KineticMethod::stencil);
// Per-species share of the interacting kinetic energy, sum_{i in l} <p_i^2>/2m_i (stencil).
std::array<double, 2> species_kinetic(const InternalWavefunction& psi);
std::array<double, 2> species_kinetic_spectral(const InternalWavefunction& psi);

// Expectation of a function of the c.m.-frame positions, evaluated on the xi grid.
double direct_expectation(const InternalWavefunction& psi, const std::function<double(const std::vector<double>&)>& f);
// Same quantity as an integral over laboratory coordinates with delta(R) eliminating the last
// particle; the wavefunction is evaluated by trigonometric interpolation. N = 2 or 3.
double lab_frame_expectation(const InternalWavefunction& psi,
                             const std::function<double(const std::vector<double>&)>& f, std::size_t n_lab);

// One-body moment int f rho^(l) evaluated exactly on the xi-grid measure.
double one_body_moment(const InternalWavefunction& psi, int l, const std::function<double(double)>& f);

// Hartree-type double integral int int rho_a rho_b' u of the exact measures (fine auxiliary grid).
double measure_hartree(const InternalWavefunction& psi, int la, int lb, const PotentialSpec& u);

// Normalized Gaussian c.m. wave packet; |Gamma|^2 has standard deviation `width`.
struct CMWavepacket {
  double center = 0.0;
  double width = 1.0;
  double momentum = 0.0;
  double density(double R) const;
};

GridFunction lab_density_convolve(const GridFunction& rho_int, const CMWavepacket& gamma);

// Reference quantities that the exact-oracle functional consumes.
struct ExactOracle {
  double energy = 0.0;
  std::array<double, 2> kinetic{};           // interacting kinetic per species
  std::array<double, 2> intra_interaction{}; // 1/2 int int gamma u
  double coupling_interaction = 0.0;         // int int gamma12 u12
  std::array<double, 2> vint{};              // int v_int rho
  std::array<double, 2> hartree{};           // from the exact measures
  double hartree12 = 0.0;
  std::array<int, 2> counts{};
  DensitySet densities;
};

ExactOracle make_oracle(const InternalWavefunction& psi, const Grid1D& r_grid);
ExactOracle make_oracle(const InternalWavefunction& psi);

// All decomposition terms from exact objects; without a KS reference the KS kinetic is left zero and flagged.
EnergyBreakdown energy_breakdown_exact(const ExactOracle& oracle,
                                       std::optional<std::array<double, 2>> ks_kinetic = std::nullopt);
EnergyBreakdown energy_breakdown_exact(const InternalWavefunction& psi);

} // namespace idft
