#include "idft/limits.hpp"
#include "idft/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace idft {

std::vector<double> LimitReport::column(std::size_t j) const {
  std::vector<double> c;
  for (const auto& r : rows) c.push_back(r.at(j));
  return c;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t last) {
  const std::size_t n = std::min({x.size(), y.size(), last});
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = x.size() - n; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double dn = double(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

bool strictly_decreasing(const std::vector<double>& y, std::size_t from) {
  for (std::size_t i = from + 1; i < y.size(); ++i)
    if (!(y[i] < y[i - 1])) return false;
  return true;
}

namespace {

std::vector<Grid1D> make_axes(const AxesFactory& f, const SystemSpec& spec, const JacobiMap& map) {
  if (f) return f(spec, map);
  return std::vector<Grid1D>(std::size_t(map.dims()), spec.grid.grid());
}

InternalWavefunction solve(const SystemSpec& spec, const JacobiMap& map, const AxesFactory& axes) {
  const InternalHamiltonian H(spec, map, make_axes(axes, spec, map), spec.solver.stencil);
  SolveOptions opt;
  return solve_ground(H, opt);
}

void require_monotone_sweep(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) throw Error(ErrorKind::validation_error, "sweep values must be strictly increasing");
}

double table_l1(const Table2D& a, const Table2D& b) {
  Table2D d(a.grid);
  for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] = std::abs(a.values[k] - b.values[k]);
  return d.integral();
}

void scale_amplitude(PotentialSpec& p, double lambda) {
  if (p.kind == PairKind::harmonic) p.k *= lambda;
  else p.A *= lambda;
}

} // namespace

// ---------------------------------------------------------------- heavy-mass limit

LimitReport mass_ratio_sweep(const SystemSpec& tmpl, const std::vector<double>& ratios, const AxesFactory& axes) {
  require_monotone_sweep(ratios);
  if (tmpl.species[1].count < 1) throw Error(ErrorKind::missing_species, "mass-ratio sweep needs a light species");
  LimitReport rep;
  rep.parameter = "mass_ratio";
  rep.observables = {"map_difference", "light_density_l1", "light_kinetic_difference"};
  for (double ratio : ratios) {
    if (!(ratio >= 1)) throw Error(ErrorKind::validation_error, "mass ratios must be >= 1");
    SystemSpec spec = tmpl;
    spec.species[0].mass = ratio * tmpl.species[1].mass;
    const JacobiMap full = build_jacobi_map(spec.counts(), spec.masses());
    const JacobiMap heavy = heavy_mass_map(spec.counts(), spec.masses());
    const double map_diff = (full.forward - heavy.forward).cwiseAbs().maxCoeff();
    const InternalWavefunction a = solve(spec, full, axes);
    const InternalWavefunction b = solve(spec, heavy, axes);
    const Grid1D rg = spec.grid.grid();
    const double rho_diff = l1_distance(internal_density(a, 1, rg), internal_density(b, 1, rg));
    const double t_diff = std::abs(species_kinetic(a)[1] - species_kinetic(b)[1]);
    rep.values.push_back(ratio);
    rep.rows.push_back({map_diff, rho_diff, t_diff});
  }
  const std::size_t from = ratios.front() <= 1.0 ? 1 : 0;
  for (std::size_t j = 0; j < rep.observables.size(); ++j) {
    const auto c = rep.column(j);
    rep.monotone.push_back(strictly_decreasing(c, from) ? 1 : 0);
    rep.exponents.push_back(fit_loglog_slope(rep.values, c));
    rep.passed = rep.passed && rep.monotone.back() == 1;
  }
  for (std::size_t j = 0; j < 2; ++j)
    if (!(std::abs(rep.exponents[j] + 1.0) <= 0.3)) {
      rep.passed = false;
      rep.notes.push_back(rep.observables[j] + " slope outside -1 +- 0.3");
    }
  return rep;
}

// ---------------------------------------------------------------- traditional reduction

GridFunction traditional_light_potential(const KSState& state, const SystemSpec& spec, const FunctionalSpec& f,
                                         int light) {
  const int heavy = 1 - light;
  const std::size_t li = std::size_t(light);
  // External potential seen by the light species: its own v_int plus the heavy mean field.
  GridFunction v = sample(state.grid, [&](double r) { return eval_internal_potential(spec.vint[li], r); });
  const GridFunction from_heavy = hartree_potential(state.species[std::size_t(heavy)].rho, spec.u12);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] += from_heavy[k];
  if (f.intra[li] != Channel::none) {
    const GridFunction own = hartree_potential(state.species[li].rho, spec.intra(light));
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += own[k];
  }
  const GridFunction xc = xc_potential(f, state, spec, light, 0);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] += xc[k];
  return v;
}

ReductionCheck traditional_reduction_check(const SystemSpec& spec, const FunctionalSpec& f_in,
                                           const ExactOracle* oracle) {
  if (spec.species[0].count < 1 || spec.species[1].count < 1)
    throw Error(ErrorKind::missing_species, "reduction check needs heavy and light species");
  FunctionalSpec f = f_in;
  f.coupling = Channel::hartree; // E_C^(12) = 0
  ReductionCheck out;
  out.light = spec.species[0].mass >= spec.species[1].mass ? 1 : 0;
  out.state = scf_solve(spec, f);
  GridFunction via_ks = ks_potential(out.light, out.state, spec, f);
  const GridFunction xc = xc_potential(f, out.state, spec, out.light, 0);
  for (std::size_t k = 0; k < via_ks.size(); ++k) via_ks[k] += xc[k];
  const GridFunction via_trad = traditional_light_potential(out.state, spec, f, out.light);
  for (std::size_t k = 0; k < via_ks.size(); ++k)
    out.potential_difference = std::max(out.potential_difference, std::abs(via_ks[k] - via_trad[k]));
  if (oracle) {
    out.coupling_interaction = oracle->coupling_interaction;
    out.coupling_correlation = oracle->coupling_interaction - oracle->hartree12;
  } else {
    out.coupling_interaction = out.coupling_correlation = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

LimitReport coupling_sweep(const SystemSpec& tmpl, const std::vector<double>& amplitudes, const AxesFactory& axes) {
  require_monotone_sweep(amplitudes);
  if (tmpl.u12.kind == PairKind::none) throw Error(ErrorKind::validation_error, "coupling sweep needs u12");
  LimitReport rep;
  rep.parameter = "coupling_amplitude";
  rep.observables = {"E_C12", "coupling_interaction", "coupling_hartree"};
  for (double lambda : amplitudes) {
    if (!(lambda > 0)) throw Error(ErrorKind::validation_error, "coupling amplitudes must be positive");
    SystemSpec spec = tmpl;
    scale_amplitude(spec.u12, lambda);
    const JacobiMap map = build_jacobi_map(spec.counts(), spec.masses());
    const InternalWavefunction psi = solve(spec, map, axes);
    const double inter = direct_expectation(psi, [&](const std::vector<double>& x) {
      return potential_terms(spec, psi.map.species, x).coupling;
    });
    const double h12 = measure_hartree(psi, 0, 1, spec.u12);
    rep.values.push_back(lambda);
    rep.rows.push_back({inter - h12, inter, h12});
  }
  rep.exponents = {fit_loglog_slope(rep.values, rep.column(0)), std::numeric_limits<double>::quiet_NaN(),
                   std::numeric_limits<double>::quiet_NaN()};
  rep.monotone = {-1, -1, -1};
  rep.passed = std::abs(rep.exponents[0] - 2.0) <= 0.3;
  if (!rep.passed) rep.notes.push_back("E_C12 exponent outside 2 +- 0.3");
  return rep;
}

// ---------------------------------------------------------------- clamped heavy particles

ClampedPoint clamped_nuclei_solve(const SystemSpec& spec, const std::vector<double>& pos, const FunctionalSpec& f) {
  if (int(pos.size()) != spec.species[0].count)
    throw Error(ErrorKind::dimension_mismatch, "need one position per heavy particle");
  if (spec.species[1].count < 1) throw Error(ErrorKind::missing_species, "clamped solve needs a light species");
  double sum = 0.0, scale = 1.0;
  for (double r : pos) {
    sum += spec.species[0].mass * r;
    scale += std::abs(spec.species[0].mass * r);
  }
  if (std::abs(sum) > 1e-10 * scale)
    throw Error(ErrorKind::constraint_violation, "heavy positions must have their mass-weighted sum at zero");

  // Light species alone, in the static field of the clamped heavy particles.
  SystemSpec light = spec;
  light.species[0] = spec.species[1];
  light.species[1].count = 0;
  light.u11 = spec.u22;
  light.vint[0] = spec.vint[1];
  light.vint[1] = {};
  ScfOptions opt = ScfOptions::from(spec);
  const Grid1D g = spec.grid.grid();
  GridFunction ext(g);
  for (double r : pos)
    for (std::size_t k = 0; k < g.n; ++k) ext[k] += eval_pair_potential(spec.u12, g.x(k) - r);
  opt.external[0] = ext;
  const FunctionalSpec lf{{f.intra[1], Channel::none}, Channel::none, nullptr};
  const KSState st = scf_solve(light, lf, opt);

  ClampedPoint cp;
  cp.heavy_positions = pos;
  cp.light = ks_energy(st, lf, light, opt);
  cp.light_energy = cp.light.total;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    cp.heavy_vint += eval_internal_potential(spec.vint[0], pos[i]);
    for (std::size_t j = i + 1; j < pos.size(); ++j) cp.heavy_pair += eval_pair_potential(spec.u11, pos[i] - pos[j]);
  }
  cp.total = cp.light_energy + cp.heavy_pair + cp.heavy_vint;
  return cp;
}

// ---------------------------------------------------------------- classical limit

std::vector<GridFunction> localized_densities(const GridFunction& rho, int count) {
  if (count < 1) throw Error(ErrorKind::invalid_count, "need at least one piece");
  const Grid1D& g = rho.grid;
  const double h = g.spacing();
  std::vector<double> w(g.n);
  for (std::size_t i = 0; i < g.n; ++i) w[i] = ((i == 0 || i + 1 == g.n) ? 0.5 * h : h) * std::max(0.0, rho[i]);
  double total = 0.0;
  for (double x : w) total += x;
  std::vector<GridFunction> out(static_cast<std::size_t>(count), GridFunction(g));
  double start = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    const double end = start + w[i];
    for (int p = 0; p < count && w[i] > 0; ++p) {
      const double lo = total * p / count, hi = total * (p + 1) / count;
      const double overlap = std::max(0.0, std::min(end, hi) - std::max(start, lo));
      out[std::size_t(p)][i] = std::max(0.0, rho[i]) * overlap / w[i];
    }
    start = end;
  }
  return out;
}

LimitReport classical_limit_sweep(const SystemSpec& tmpl, const std::vector<double>& stiffness,
                                  const AxesFactory& axes) {
  require_monotone_sweep(stiffness);
  if (tmpl.species[0].statistics != Statistics::boson)
    throw Error(ErrorKind::validation_error, "classical sweep supports a bosonic heavy species");
  if (tmpl.species[0].count < 2) throw Error(ErrorKind::too_few_particles, "classical sweep needs two heavy particles");
  LimitReport rep;
  rep.parameter = "stiffness";
  rep.observables = {"width", "kinetic_correlation", "gamma_l1", "xc_interaction", "sic_energy"};
  for (double k : stiffness) {
    SystemSpec spec = tmpl;
    if (spec.u11.kind == PairKind::harmonic) spec.u11.k = k;
    else if (spec.vint[0].kind == InternalKind::harmonic_trap) spec.vint[0].k = k;
    else throw Error(ErrorKind::validation_error, "classical sweep needs a harmonic u11 or heavy trap");
    const JacobiMap map = build_jacobi_map(spec.counts(), spec.masses());
    const InternalWavefunction psi = solve(spec, map, axes);
    const Grid1D rg = spec.grid.grid();
    const int n = spec.species[0].count;
    const double m = spec.species[0].mass;
    const GridFunction rho = internal_density(psi, 0, rg);
    const Table2D gamma = pair_density(psi, 0, rg);

    const double width = std::sqrt(one_body_moment(psi, 0, [](double r) { return r * r; }) / n);
    GridFunction phi(rg);
    for (std::size_t i = 0; i < rg.n; ++i) phi[i] = std::sqrt(std::max(0.0, rho[i]) / n);
    const double t_s = n * dot(phi, kinetic_apply(phi, m, spec.solver.stencil));
    const double t_c = species_kinetic(psi)[0] - t_s;

    const auto pieces = localized_densities(rho, n);
    Table2D model(rg);
    for (std::size_t i = 0; i < rg.n; ++i)
      for (std::size_t j = 0; j < rg.n; ++j) {
        double v = rho[i] * rho[j];
        for (const auto& p : pieces) v -= p[i] * p[j];
        model.at(i, j) = v;
      }
    const double l1 = table_l1(gamma, model);

    const double interaction = direct_expectation(psi, [&](const std::vector<double>& x) {
      return potential_terms(spec, psi.map.species, x).intra[0];
    });
    const double xc_int = interaction - measure_hartree(psi, 0, 0, spec.u11);
    double sic = 0.0;
    for (const auto& p : pieces) sic -= hartree_energy(p, p, spec.u11, true);
    rep.values.push_back(k);
    rep.rows.push_back({width, t_c, l1, xc_int, sic});
  }
  rep.monotone = {-1, strictly_decreasing(rep.column(1)) ? 1 : 0, strictly_decreasing(rep.column(2)) ? 1 : 0, -1, -1};
  rep.exponents.assign(rep.observables.size(), std::numeric_limits<double>::quiet_NaN());
  rep.passed = rep.monotone[1] == 1 && rep.monotone[2] == 1;
  return rep;
}

} // namespace idft
