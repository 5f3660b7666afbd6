#include "idft/ks.hpp"
#include "idft/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace idft {

std::string_view to_string(Channel c) {
  switch (c) {
  case Channel::none: return "none";
  case Channel::hartree: return "hartree";
  case Channel::sic: return "sic";
  case Channel::exact_oracle: return "exact-oracle";
  }
  return "?";
}

FunctionalSpec functional_from_name(std::string_view name, const ExactOracle* oracle) {
  FunctionalSpec f;
  f.oracle = oracle;
  if (name == "none") f = {{Channel::none, Channel::none}, Channel::none, oracle};
  else if (name == "hartree" || name == "hartree_only") f = {{Channel::hartree, Channel::hartree}, Channel::hartree, oracle};
  else if (name == "sic") f = {{Channel::sic, Channel::sic}, Channel::hartree, oracle};
  else if (name == "exact-oracle" || name == "exact_oracle")
    f = {{Channel::exact_oracle, Channel::exact_oracle}, Channel::exact_oracle, oracle};
  else throw Error(ErrorKind::validation_error, "unknown functional '" + std::string(name) + "'");
  return f;
}

void validate(const FunctionalSpec& f) {
  if (f.coupling == Channel::sic)
    throw Error(ErrorKind::validation_error, "sic applies to intra-species channels only");
  const bool needs_oracle = f.intra[0] == Channel::exact_oracle || f.intra[1] == Channel::exact_oracle ||
                            f.coupling == Channel::exact_oracle;
  if (needs_oracle && !f.oracle) throw Error(ErrorKind::missing_oracle, "exact-oracle functional needs an oracle");
}

ScfOptions ScfOptions::from(const SystemSpec& spec) {
  ScfOptions o;
  o.tol = spec.solver.tol;
  o.mix = spec.solver.mix;
  o.max_iter = std::size_t(spec.solver.max_iter);
  o.stencil = spec.solver.stencil;
  return o;
}

// ---------------------------------------------------------------- Hartree

namespace {

std::vector<double> trapezoid_weights(const Grid1D& g) {
  std::vector<double> w(g.n, g.spacing());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

double integrate_product(const GridFunction& a, const GridFunction& b) {
  const auto w = trapezoid_weights(a.grid);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * a[i] * b[i];
  return s;
}

void require_same_grid(const GridFunction& a, const GridFunction& b) {
  if (!(a.grid == b.grid)) throw Error(ErrorKind::dimension_mismatch, "densities live on different grids");
}

} // namespace

GridFunction hartree_potential(const GridFunction& rho, const PotentialSpec& u) {
  const Grid1D& g = rho.grid;
  GridFunction v(g);
  if (u.kind == PairKind::none) return v;
  const std::size_t n = g.n;
  const double h = g.spacing();
  std::vector<double> table(2 * n - 1);
  for (std::size_t k = 0; k < table.size(); ++k) table[k] = eval_pair_potential(u, (double(k) - double(n - 1)) * h);
  const auto w = trapezoid_weights(g);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += w[k] * rho[k] * table[j + n - 1 - k];
    v[j] = s;
  }
  return v;
}

double hartree_energy(const GridFunction& a, const GridFunction& b, const PotentialSpec& u, bool same_species) {
  require_same_grid(a, b);
  if (u.kind == PairKind::none) return 0.0;
  const double e = integrate_product(a, hartree_potential(b, u));
  return same_species ? 0.5 * e : e;
}

GridFunction orbital_density(const KSSpecies& s, std::size_t i) {
  GridFunction d(s.orbitals.at(i).grid);
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = s.orbitals[i][k] * s.orbitals[i][k];
  return d;
}

// ---------------------------------------------------------------- functionals

double ks_kinetic(const KSSpecies& s, int stencil) {
  double t = 0.0;
  for (std::size_t i = 0; i < s.orbitals.size(); ++i)
    t += s.occupations[i] * dot(s.orbitals[i], kinetic_apply(s.orbitals[i], s.mass, stencil));
  return t;
}

XCEnergies xc_energy(const FunctionalSpec& f, const KSState& state, const SystemSpec& spec) {
  validate(f);
  XCEnergies e;
  for (int l = 0; l < 2; ++l) {
    const KSSpecies& s = state.species[std::size_t(l)];
    if (!s.active()) continue;
    switch (f.intra[std::size_t(l)]) {
    case Channel::sic:
      for (std::size_t i = 0; i < s.orbitals.size(); ++i) {
        const GridFunction d = orbital_density(s, i);
        e.interaction[std::size_t(l)] -= s.occupations[i] * hartree_energy(d, d, spec.intra(l), true);
      }
      break;
    case Channel::exact_oracle:
      e.interaction[std::size_t(l)] =
          f.oracle->intra_interaction[std::size_t(l)] - hartree_energy(s.rho, s.rho, spec.intra(l), true);
      e.kinetic[std::size_t(l)] = f.oracle->kinetic[std::size_t(l)] - ks_kinetic(s, spec.solver.stencil);
      break;
    default: break;
    }
  }
  if (f.coupling == Channel::exact_oracle && state.species[0].active() && state.species[1].active())
    e.coupling = f.oracle->coupling_interaction -
                 hartree_energy(state.species[0].rho, state.species[1].rho, spec.u12, false);
  return e;
}

GridFunction xc_potential(const FunctionalSpec& f, const KSState& state, const SystemSpec& spec, int l,
                          std::size_t orbital) {
  validate(f);
  const Channel c = f.intra[std::size_t(l)];
  if (c == Channel::exact_oracle || f.coupling == Channel::exact_oracle)
    throw Error(ErrorKind::not_differentiable, "exact-oracle channels provide energies only");
  GridFunction v(state.grid);
  if (c != Channel::sic) return v;
  const KSSpecies& s = state.species[std::size_t(l)];
  GridFunction d;
  if (orbital < s.orbitals.size()) d = orbital_density(s, orbital);
  else {
    // No orbitals yet: each particle carries an equal share of the density.
    d = s.rho;
    for (auto& x : d.values) x /= double(s.count);
  }
  v = hartree_potential(d, spec.intra(l));
  for (auto& x : v.values) x = -x;
  return v;
}

GridFunction ks_potential(int l, const KSState& state, const SystemSpec& spec, const FunctionalSpec& f,
                          const ScfOptions& opt) {
  validate(f);
  if (f.intra[std::size_t(l)] == Channel::exact_oracle || f.coupling == Channel::exact_oracle)
    throw Error(ErrorKind::not_differentiable, "exact-oracle channels provide energies only");
  const Grid1D& g = state.grid;
  const InternalPotentialSpec& vi = spec.vint[std::size_t(l)];
  GridFunction v = sample(g, [&](double r) { return eval_internal_potential(vi, r); });
  if (opt.external[std::size_t(l)]) {
    require_same_grid(v, *opt.external[std::size_t(l)]);
    for (std::size_t i = 0; i < g.n; ++i) v[i] += (*opt.external[std::size_t(l)])[i];
  }
  const KSSpecies& own = state.species[std::size_t(l)];
  if (f.intra[std::size_t(l)] != Channel::none && own.active()) {
    const GridFunction vh = hartree_potential(own.rho, spec.intra(l));
    for (std::size_t i = 0; i < g.n; ++i) v[i] += vh[i];
  }
  const KSSpecies& other = state.species[std::size_t(1 - l)];
  if (f.coupling != Channel::none && other.active()) {
    const GridFunction vh = hartree_potential(other.rho, spec.u12);
    for (std::size_t i = 0; i < g.n; ++i) v[i] += vh[i];
  }
  return v;
}

// ---------------------------------------------------------------- SCF

namespace {

std::size_t orbital_count(const KSSpecies& s) {
  return s.statistics == Statistics::boson ? 1 : std::size_t(s.count);
}

void set_density(KSSpecies& s) {
  s.rho = GridFunction(s.orbitals.front().grid);
  for (std::size_t i = 0; i < s.orbitals.size(); ++i)
    for (std::size_t k = 0; k < s.rho.size(); ++k) s.rho[k] += s.occupations[i] * s.orbitals[i][k] * s.orbitals[i][k];
}

void lowdin(std::vector<GridFunction>& orbs) {
  const std::size_t n = orbs.size();
  if (n < 2) return;
  Eigen::MatrixXd S(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) S(Eigen::Index(i), Eigen::Index(j)) = dot(orbs[i], orbs[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const Eigen::MatrixXd X =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  std::vector<GridFunction> out(n, GridFunction(orbs[0].grid));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const double c = X(Eigen::Index(i), Eigen::Index(j));
      for (std::size_t k = 0; k < out[j].size(); ++k) out[j][k] += c * orbs[i][k];
    }
  orbs = std::move(out);
}

double expectation(const GridFunction& phi, const GridFunction& v, double mass, int stencil) {
  const GridFunction t = kinetic_apply(phi, mass, stencil);
  double s = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) s += phi[k] * (t[k] + v[k] * phi[k]);
  return s * phi.grid.spacing();
}

// Orbitals of species l in its current potential.
void diagonalize(KSSpecies& s, int l, const GridFunction& v, const KSState& state, const SystemSpec& spec,
                 const FunctionalSpec& f, int stencil) {
  const std::size_t n_orb = orbital_count(s);
  if (n_orb > v.size()) throw Error(ErrorKind::size_exceeded, "more orbitals than grid points");
  s.occupations.assign(n_orb, s.statistics == Statistics::boson ? double(s.count) : 1.0);
  if (f.intra[std::size_t(l)] == Channel::sic) {
    std::vector<GridFunction> orbs;
    std::vector<GridFunction> potentials;
    for (std::size_t i = 0; i < n_orb; ++i) {
      GridFunction vi = xc_potential(f, state, spec, l, i);
      for (std::size_t k = 0; k < vi.size(); ++k) vi[k] += v[k];
      const Eigenstates es = lowest_states(vi, s.mass, stencil, i + 1);
      orbs.push_back(es.vectors[i]);
      potentials.push_back(std::move(vi));
    }
    lowdin(orbs);
    s.eigenvalues.resize(n_orb);
    for (std::size_t i = 0; i < n_orb; ++i) s.eigenvalues[i] = expectation(orbs[i], potentials[i], s.mass, stencil);
    s.orbitals = std::move(orbs);
  } else {
    const bool want_gap = s.statistics == Statistics::fermion && n_orb < v.size();
    const Eigenstates es = lowest_states(v, s.mass, stencil, n_orb + (want_gap ? 1 : 0));
    if (want_gap && es.values[n_orb] - es.values[n_orb - 1] < 1e-10)
      throw Error(ErrorKind::degenerate_fermi_level,
                  "species " + std::to_string(l + 1) + " has a degenerate highest occupied level");
    s.orbitals.assign(es.vectors.begin(), es.vectors.begin() + long(n_orb));
    s.eigenvalues.assign(es.values.begin(), es.values.begin() + long(n_orb));
  }
  s.potential = v;
}

} // namespace

KSState scf_solve(const SystemSpec& spec, const FunctionalSpec& f, const ScfOptions& opt) {
  validate(spec);
  validate(f);
  if (f.intra[0] == Channel::exact_oracle || f.intra[1] == Channel::exact_oracle || f.coupling == Channel::exact_oracle)
    throw Error(ErrorKind::not_differentiable, "exact-oracle channels cannot drive the self-consistent loop");
  if (!(opt.mix > 0 && opt.mix <= 1)) throw Error(ErrorKind::validation_error, "mix must lie in (0, 1]");

  KSState state;
  state.grid = spec.grid.grid();
  const Grid1D& g = state.grid;
  for (int l = 0; l < 2; ++l) {
    KSSpecies& s = state.species[std::size_t(l)];
    s.count = spec.species[std::size_t(l)].count;
    s.mass = spec.species[std::size_t(l)].mass;
    s.statistics = spec.species[std::size_t(l)].statistics;
  }

  // Starting densities: v_int-only orbitals, or a normalized Gaussian when there is nothing to bind.
  for (int l = 0; l < 2; ++l) {
    KSSpecies& s = state.species[std::size_t(l)];
    if (!s.active()) continue;
    if (spec.vint[std::size_t(l)].kind != InternalKind::none || opt.external[std::size_t(l)]) {
      KSState bare = state;
      FunctionalSpec free_f{{Channel::none, Channel::none}, Channel::none, nullptr};
      const GridFunction v0 = ks_potential(l, bare, spec, free_f, opt);
      diagonalize(s, l, v0, bare, spec, free_f, opt.stencil);
      set_density(s);
    } else {
      const double mid = 0.5 * (g.x_min + g.x_max), w = 0.1 * (g.x_max - g.x_min);
      s.rho = sample(g, [&](double r) { return std::exp(-0.5 * (r - mid) * (r - mid) / (w * w)); });
      const double norm = integrate(s.rho);
      for (auto& x : s.rho.values) x *= double(s.count) / norm;
    }
  }

  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    std::array<GridFunction, 2> v;
    for (int l = 0; l < 2; ++l)
      if (state.species[std::size_t(l)].active()) v[std::size_t(l)] = ks_potential(l, state, spec, f, opt);
    KSState next = state;
    double residual = 0.0;
    for (int l = 0; l < 2; ++l) {
      KSSpecies& s = next.species[std::size_t(l)];
      if (!s.active()) continue;
      diagonalize(s, l, v[std::size_t(l)], state, spec, f, opt.stencil);
      set_density(s);
      residual = std::max(residual, l1_distance(s.rho, state.species[std::size_t(l)].rho));
    }
    next.iterations = it;
    next.residual = residual;
    next.residual_history.push_back(residual);
    if (residual <= opt.tol) {
      next.converged = true;
      return next;
    }
    for (int l = 0; l < 2; ++l) {
      KSSpecies& s = next.species[std::size_t(l)];
      if (!s.active()) continue;
      const GridFunction& old = state.species[std::size_t(l)].rho;
      for (std::size_t k = 0; k < g.n; ++k) s.rho[k] = (1.0 - opt.mix) * old[k] + opt.mix * s.rho[k];
    }
    state = std::move(next);
  }
  std::ostringstream msg;
  msg << "self-consistent loop stopped after " << opt.max_iter << " iterations; last residuals:";
  const auto& h = state.residual_history;
  for (std::size_t i = h.size() > 5 ? h.size() - 5 : 0; i < h.size(); ++i) msg << ' ' << h[i];
  throw Error(ErrorKind::no_convergence, msg.str());
}

KSState scf_solve(const SystemSpec& spec, const FunctionalSpec& f) {
  return scf_solve(spec, f, ScfOptions::from(spec));
}

EnergyBreakdown ks_energy(const KSState& state, const FunctionalSpec& f, const SystemSpec& spec,
                          const ScfOptions& opt) {
  EnergyBreakdown b;
  const XCEnergies xc = xc_energy(f, state, spec);
  for (int l = 0; l < 2; ++l) {
    const KSSpecies& s = state.species[std::size_t(l)];
    if (!s.active()) continue;
    const std::size_t li = std::size_t(l);
    b.ks_kinetic[li] = ks_kinetic(s, opt.stencil);
    GridFunction v = sample(state.grid, [&](double r) { return eval_internal_potential(spec.vint[li], r); });
    if (opt.external[li])
      for (std::size_t k = 0; k < v.size(); ++k) v[k] += (*opt.external[li])[k];
    b.vint[li] = integrate_product(s.rho, v);
    if (f.intra[li] != Channel::none) b.hartree[li] = hartree_energy(s.rho, s.rho, spec.intra(l), true);
    b.xc_interaction[li] = xc.interaction[li];
    b.xc_kinetic[li] = xc.kinetic[li];
  }
  if (f.coupling != Channel::none && state.species[0].active() && state.species[1].active())
    b.hartree12 = hartree_energy(state.species[0].rho, state.species[1].rho, spec.u12, false);
  b.c12 = xc.coupling;
  b.close();
  return b;
}

EnergyBreakdown ks_energy(const KSState& state, const FunctionalSpec& f, const SystemSpec& spec) {
  return ks_energy(state, f, spec, ScfOptions::from(spec));
}

// ---------------------------------------------------------------- inversion

InversionResult invert_ks_single_orbital(const GridFunction& rho, double mass, int stencil) {
  if (!(mass > 0)) throw Error(ErrorKind::validation_error, "mass must be positive");
  const Grid1D& g = rho.grid;
  const std::size_t n = g.n;
  double peak = 0.0;
  for (double x : rho.values) peak = std::max(peak, x);
  if (!(peak > 0)) throw Error(ErrorKind::unstable_inversion, "density is not positive anywhere");
  const double cut = 1e-10 * peak;
  std::size_t lo = 0, hi = n - 1;
  while (lo < n && !(rho[lo] >= cut)) ++lo;
  while (hi > lo && !(rho[hi] >= cut)) --hi;
  for (std::size_t i = lo; i <= hi; ++i)
    if (!(rho[i] >= cut)) throw Error(ErrorKind::unstable_inversion, "density has an interior zero near r = " +
                                                                        std::to_string(g.x(i)));
  if (hi - lo < 4) throw Error(ErrorKind::unstable_inversion, "retained support is too small");

  GridFunction phi(g);
  for (std::size_t i = 0; i < n; ++i) phi[i] = rho[i] > 0 ? std::sqrt(rho[i]) : 0.0;
  const GridFunction t = kinetic_apply(phi, mass, stencil); // -(1/2m) phi''
  std::vector<double> local(n, 0.0);
  for (std::size_t i = lo; i <= hi; ++i) local[i] = -t[i] / phi[i]; // (1/2m) phi''/phi
  InversionResult r;
  r.epsilon = -0.5 * (local[lo] + local[hi]);
  r.lo = lo;
  r.hi = hi;
  r.potential = GridFunction(g);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = std::clamp(i, lo, hi);
    r.potential[i] = local[j] + r.epsilon;
  }
  return r;
}

GridFunction ground_density(const GridFunction& v, double mass, double count, int stencil) {
  const Eigenstates es = lowest_states(v, mass, stencil, 1);
  GridFunction d(v.grid);
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = count * es.vectors[0][k] * es.vectors[0][k];
  return d;
}

} // namespace idft
