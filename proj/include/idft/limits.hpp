#pragma once

#include "idft/exact.hpp"
#include "idft/ks.hpp"
#include "idft/system.hpp"

#include <functional>
#include <string>
#include <vector>

namespace idft {

struct LimitReport {
  std::string parameter;
  std::vector<double> values;                  // sweep parameter, strictly monotone
  std::vector<std::string> observables;        // column names
  std::vector<std::vector<double>> rows;       // rows[i][j]: observable j at values[i]
  std::vector<double> exponents;               // fitted log-log slope per observable (NaN if not fitted)
  std::vector<int> monotone;                   // per observable: 1 decreasing, 0 not, -1 not checked
  bool passed = true;
  std::vector<std::string> notes;

  std::vector<double> column(std::size_t j) const;
};

// Least-squares slope of log|y| against log x over the last `last` points.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t last = 3);
bool strictly_decreasing(const std::vector<double>& y, std::size_t from = 0);

// Per-axis grids for a sweep point; the default uses spec.grid on every axis.
using AxesFactory = std::function<std::vector<Grid1D>(const SystemSpec&, const JacobiMap&)>;

// Species 1 heavy (mass = ratio * m2), species 2 light. Observables: forward-matrix difference,
// light-density L1 difference and |T_light(full) - T_light(heavy map)|.
LimitReport mass_ratio_sweep(const SystemSpec& tmpl, const std::vector<double>& ratios,
                             const AxesFactory& axes = {});

struct ReductionCheck {
  double potential_difference = 0.0; // max |v_S(light) - traditional assembly|
  double coupling_correlation = 0.0; // oracle E_C^(12) (NaN when not computed)
  double coupling_interaction = 0.0; // oracle int int gamma12 u12
  int light = 1;
  KSState state;
};

// KS with the coupling channel at Hartree level (E_C^(12) = 0); compares the light species potential
// with v_int + Hartree(rho_heavy, u12) + light-only channels. The oracle is optional.
ReductionCheck traditional_reduction_check(const SystemSpec& spec, const FunctionalSpec& f,
                                           const ExactOracle* oracle = nullptr);
// v_int^(light) + Hartree(rho_heavy, u12) + Hartree(rho_light, u_light) + light XC potential.
GridFunction traditional_light_potential(const KSState& state, const SystemSpec& spec, const FunctionalSpec& f,
                                         int light = 1);

// Oracle E_C^(12) as the coupling amplitude is scaled; exponent fitted on |E_C^(12)|.
LimitReport coupling_sweep(const SystemSpec& tmpl, const std::vector<double>& amplitudes,
                           const AxesFactory& axes = {});

struct ClampedPoint {
  std::vector<double> heavy_positions;
  double light_energy = 0.0; // KS energy of the light species in the clamped field
  double heavy_pair = 0.0;   // classical sum of u^(1) over heavy pairs
  double heavy_vint = 0.0;   // sum of v_int^(1) at the heavy positions
  double total = 0.0;
  EnergyBreakdown light;
};

// Species 1 is clamped at the given c.m.-frame positions; species 2 is solved with KS.
ClampedPoint clamped_nuclei_solve(const SystemSpec& spec, const std::vector<double>& heavy_positions,
                                  const FunctionalSpec& f);

// Splits rho into `count` contiguous pieces of equal weight (densities of localized particles).
std::vector<GridFunction> localized_densities(const GridFunction& rho, int count);

// Bosonic species 1 with u11 harmonic; the pair stiffness takes each value in turn. Observables:
// width, kinetic correlation (interacting minus von Weizsaecker), L1 distance between gamma and
// rho rho' - sum rho_i rho_i', xc interaction energy, -sum E_H[rho_i].
LimitReport classical_limit_sweep(const SystemSpec& tmpl, const std::vector<double>& stiffness,
                                  const AxesFactory& axes = {});

} // namespace idft
