#pragma once

#include "idft/grid.hpp"

#include <array>
#include <string>

namespace idft {

enum class Statistics { boson, fermion };

struct SpeciesSpec {
  std::string label;
  int count = 0;
  double mass = 1.0;
  Statistics statistics = Statistics::boson;
  bool operator==(const SpeciesSpec&) const = default;
};

enum class PairKind { none, gaussian, soft_coulomb, harmonic };

// gaussian: A exp(-x^2/2s^2); soft_coulomb: A/sqrt(x^2+a^2); harmonic: k x^2/2.
struct PotentialSpec {
  PairKind kind = PairKind::none;
  double A = 1.0;
  double s = 1.0;
  double a = 1.0;
  double k = 1.0;
  bool operator==(const PotentialSpec&) const = default;
};

enum class InternalKind { none, harmonic_trap, gaussian_well };

// Potential of the c.m.-frame coordinate r - R.
struct InternalPotentialSpec {
  InternalKind kind = InternalKind::none;
  double A = 1.0;
  double s = 1.0;
  double k = 1.0;
  bool operator==(const InternalPotentialSpec&) const = default;
};

struct GridSpec {
  double xmin = -10.0;
  double xmax = 10.0;
  long n = 128;
  Grid1D grid() const { return make_grid(xmin, xmax, n); }
  bool operator==(const GridSpec&) const = default;
};

struct SolverOptions {
  double tol = 1e-8;
  double mix = 0.3;
  int max_iter = 500;
  int stencil = 3;
  bool operator==(const SolverOptions&) const = default;
};

struct SystemSpec {
  std::array<SpeciesSpec, 2> species{SpeciesSpec{"1", 1, 1.0, Statistics::boson},
                                     SpeciesSpec{"2", 0, 1.0, Statistics::boson}};
  PotentialSpec u11, u22, u12;
  std::array<InternalPotentialSpec, 2> vint;
  GridSpec grid;
  SolverOptions solver;

  const PotentialSpec& intra(int l) const { return l == 0 ? u11 : u22; }
  PotentialSpec& intra(int l) { return l == 0 ? u11 : u22; }
  std::array<int, 2> counts() const { return {species[0].count, species[1].count}; }
  std::array<double, 2> masses() const { return {species[0].mass, species[1].mass}; }
  int total_count() const { return species[0].count + species[1].count; }
  bool operator==(const SystemSpec&) const = default;
};

SystemSpec parse_config(const std::string& text);
std::string serialize_config(const SystemSpec& spec);

// Throws validation-error naming the first offending field.
void validate(const SystemSpec& spec);

double eval_pair_potential(const PotentialSpec& p, double x);
double eval_internal_potential(const InternalPotentialSpec& p, double r);

std::string_view to_string(Statistics s);
std::string_view to_string(PairKind k);
std::string_view to_string(InternalKind k);

// Species 1 and 2 exchanged, with u11/u22 and the internal potentials swapped.
SystemSpec swap_species(const SystemSpec& spec);

} // namespace idft
