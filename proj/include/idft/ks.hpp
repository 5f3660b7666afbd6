#pragma once

#include "idft/energy.hpp"
#include "idft/exact.hpp"
#include "idft/grid.hpp"
#include "idft/system.hpp"

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace idft {

// Treatment of one interaction channel.
//   none: channel switched off entirely (no Hartree, no XC)
//   hartree: mean field only
//   sic: Hartree plus per-orbital self-interaction correction (intra-species only)
//   exact_oracle: Hartree plus XC/correlation energies read from an exact solution (energies only)
enum class Channel { none, hartree, sic, exact_oracle };

struct FunctionalSpec {
  std::array<Channel, 2> intra{Channel::hartree, Channel::hartree};
  Channel coupling = Channel::hartree;
  const ExactOracle* oracle = nullptr;
};

std::string_view to_string(Channel c);
// "none", "hartree", "sic" or "exact-oracle"; sic applies to the intra-species channels and keeps a
// Hartree coupling.
FunctionalSpec functional_from_name(std::string_view name, const ExactOracle* oracle = nullptr);
void validate(const FunctionalSpec& f);

struct KSSpecies {
  int count = 0;
  double mass = 1.0;
  Statistics statistics = Statistics::boson;
  std::vector<GridFunction> orbitals; // normalized with dot()
  std::vector<double> eigenvalues;
  std::vector<double> occupations;
  GridFunction rho;        // sum occ |phi|^2
  GridFunction potential;  // common KS potential of the last step
  bool active() const { return count > 0; }
};

struct KSState {
  Grid1D grid;
  std::array<KSSpecies, 2> species;
  std::size_t iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;
  bool converged = false;
};

struct ScfOptions {
  double tol = 1e-8;
  double mix = 0.3;
  std::size_t max_iter = 500;
  int stencil = 3;
  std::array<std::optional<GridFunction>, 2> external; // extra fixed one-body potentials
  static ScfOptions from(const SystemSpec& spec);
};

// v(r) = int rho(r') u(r - r') dr' (trapezoid weights).
GridFunction hartree_potential(const GridFunction& rho, const PotentialSpec& u);
// 1/2 int int rho_a rho_b u when same_species, otherwise without the 1/2.
double hartree_energy(const GridFunction& rho_a, const GridFunction& rho_b, const PotentialSpec& u,
                      bool same_species);

// Density carried by one particle in orbital i (|phi_i|^2).
GridFunction orbital_density(const KSSpecies& s, std::size_t i);

struct XCEnergies {
  std::array<double, 2> interaction{}; // intra-species XC, interaction part
  std::array<double, 2> kinetic{};     // interacting minus KS kinetic (exact oracle only)
  double coupling = 0.0;               // E_C^(12)
};

double ks_kinetic(const KSSpecies& s, int stencil);
XCEnergies xc_energy(const FunctionalSpec& f, const KSState& state, const SystemSpec& spec);

// XC potential of species l. For sic it is the potential acting on orbital `orbital`.
GridFunction xc_potential(const FunctionalSpec& f, const KSState& state, const SystemSpec& spec, int l,
                          std::size_t orbital = 0);

// Common KS potential of species l: v_int + Hartree(own) + Hartree(other, u12) + external.
// The sic orbital correction is added separately (xc_potential).
GridFunction ks_potential(int l, const KSState& state, const SystemSpec& spec, const FunctionalSpec& f,
                          const ScfOptions& opt = {});

KSState scf_solve(const SystemSpec& spec, const FunctionalSpec& f, const ScfOptions& opt);
KSState scf_solve(const SystemSpec& spec, const FunctionalSpec& f);

EnergyBreakdown ks_energy(const KSState& state, const FunctionalSpec& f, const SystemSpec& spec,
                          const ScfOptions& opt);
// Uses ScfOptions::from(spec).
EnergyBreakdown ks_energy(const KSState& state, const FunctionalSpec& f, const SystemSpec& spec);

struct InversionResult {
  GridFunction potential;
  double epsilon = 0.0;
  std::size_t lo = 0, hi = 0; // retained index range (inclusive)
};

// Single-orbital inversion phi = sqrt(rho / N); potential held constant outside the retained range.
InversionResult invert_ks_single_orbital(const GridFunction& rho, double mass, int stencil = 3);

// N |phi_0|^2 of the lowest orbital in v.
GridFunction ground_density(const GridFunction& v, double mass, double count, int stencil = 3);

} // namespace idft
