#pragma once

#include <array>

namespace idft {

// Terms of the internal energy decomposition. Index 0/1 is species 1/2.
struct EnergyBreakdown {
  std::array<double, 2> ks_kinetic{};     // noninteracting kinetic of the KS reference
  bool ks_kinetic_symbolic = false;       // no KS reference: ks_kinetic is 0 and xc_kinetic carries all
  std::array<double, 2> hartree{};        // 1/2 int int rho rho' u
  double hartree12 = 0.0;                 // int int rho1 rho2' u12
  std::array<double, 2> xc_interaction{}; // 1/2 int int (gamma - rho rho') u
  std::array<double, 2> xc_kinetic{};     // interacting minus KS kinetic
  double c12 = 0.0;                       // int int (gamma12 - rho1 rho2') u12
  std::array<double, 2> vint{};           // int v_int rho
  double total = 0.0;

  double xc(int l) const { return xc_interaction[std::size_t(l)] + xc_kinetic[std::size_t(l)]; }

  double sum_of_parts() const {
    double s = hartree12 + c12;
    for (std::size_t l = 0; l < 2; ++l)
      s += ks_kinetic[l] + hartree[l] + xc_interaction[l] + xc_kinetic[l] + vint[l];
    return s;
  }

  void close() { total = sum_of_parts(); }
};

} // namespace idft
