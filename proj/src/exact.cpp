#include "idft/exact.hpp"
#include "idft/error.hpp"
#include "idft/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace idft {

using cplx = std::complex<double>;

// ---------------------------------------------------------------- tensor grid

TensorGrid::TensorGrid(std::vector<Grid1D> a) : axes(std::move(a)), strides(axes.size(), 1) {
  size = 1;
  for (std::size_t k = axes.size(); k-- > 0;) {
    strides[k] = size;
    size *= axes[k].n;
  }
}

double TensorGrid::cell() const {
  double c = 1.0;
  for (const auto& g : axes) c *= g.spacing();
  return c;
}

namespace {

std::vector<double> first_derivative_stencil(int order, double h) {
  if (order == 3) return {-0.5 / h, 0.0, 0.5 / h};
  return {1.0 / (12 * h), -8.0 / (12 * h), 0.0, 8.0 / (12 * h), -1.0 / (12 * h)};
}

// y += c * D x along one axis with zero values outside the grid.
void add_axis_stencil(const std::vector<double>& x, std::vector<double>& y, const TensorGrid& t, std::size_t axis,
                      const std::vector<double>& w, double c) {
  const long half = long(w.size() / 2);
  const long n = long(t.axes[axis].n);
  const long stride = long(t.strides[axis]);
  const long total = long(t.size);
#pragma omp parallel for schedule(static) if (total > 32768)
  for (long p = 0; p < total; ++p) {
    const long i = (p / stride) % n;
    double acc = 0.0;
    for (long o = -half; o <= half; ++o) {
      const long j = i + o;
      if (j >= 0 && j < n) acc += w[std::size_t(o + half)] * x[std::size_t(p + o * stride)];
    }
    y[std::size_t(p)] += c * acc;
  }
}

void tensor_kinetic(const std::vector<double>& x, std::vector<double>& y, const TensorGrid& t,
                    const std::vector<double>& mu, int stencil) {
  for (std::size_t a = 0; a < t.dims(); ++a)
    add_axis_stencil(x, y, t, a, laplacian_stencil(stencil, t.axes[a].spacing()), -0.5 / mu[a]);
}

double sum_product(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Eigen::MatrixXd coefficients(const JacobiMap& map) {
  return map.inverse.block(0, 1, map.particles(), map.dims());
}

void positions_at(const TensorGrid& t, const Eigen::MatrixXd& coef, std::size_t p, std::vector<double>& x) {
  const std::size_t n = std::size_t(coef.rows()), d = t.dims();
  x.assign(n, 0.0);
  for (std::size_t a = 0; a < d; ++a) {
    const double xi = t.coordinate(p, a);
    for (std::size_t i = 0; i < n; ++i) x[i] += coef(Eigen::Index(i), Eigen::Index(a)) * xi;
  }
}

bool symmetric_axis(const Grid1D& g) {
  return std::abs(g.x_min + g.x_max) <= 1e-12 * (std::abs(g.x_min) + std::abs(g.x_max));
}

} // namespace

// ---------------------------------------------------------------- Hamiltonian

PotentialTerms potential_terms(const SystemSpec& spec, const std::vector<int>& species,
                               const std::vector<double>& x) {
  PotentialTerms t;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    const int li = species[i];
    t.vint[std::size_t(li)] += eval_internal_potential(spec.vint[std::size_t(li)], x[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = x[i] - x[j];
      if (li == species[j]) t.intra[std::size_t(li)] += eval_pair_potential(spec.intra(li), d);
      else t.coupling += eval_pair_potential(spec.u12, d);
    }
  }
  return t;
}

InternalHamiltonian::InternalHamiltonian(const SystemSpec& spec, const JacobiMap& map, std::vector<Grid1D> axes,
                                         int stencil)
    : spec_(spec), map_(map), tensor_(std::move(axes)), stencil_(stencil) {
  if (map.particles() > 4)
    throw Error(ErrorKind::size_exceeded, "exact solver supports at most 4 particles, got " +
                                              std::to_string(map.particles()));
  if (map.particles() < 2) throw Error(ErrorKind::invalid_count, "exact solver needs at least 2 particles");
  if (int(tensor_.dims()) != map.dims())
    throw Error(ErrorKind::dimension_mismatch, "need one grid per internal coordinate");
  laplacian_stencil(stencil, 1.0); // validates the order
  coef_ = coefficients(map);
  potential_.assign(tensor_.size, 0.0);
  const long total = long(tensor_.size);
#pragma omp parallel
  {
    std::vector<double> x;
#pragma omp for schedule(static)
    for (long p = 0; p < total; ++p) {
      positions_at(tensor_, coef_, std::size_t(p), x);
      potential_[std::size_t(p)] = potential_terms(spec_, map_.species, x).total();
    }
  }
}

void InternalHamiltonian::apply_kinetic(const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(x.size(), 0.0);
  tensor_kinetic(x, y, tensor_, map_.reduced_masses, stencil_);
}

void InternalHamiltonian::apply(const std::vector<double>& x, std::vector<double>& y) const {
  y.resize(x.size());
  const long total = long(x.size());
#pragma omp parallel for schedule(static) if (total > 32768)
  for (long p = 0; p < total; ++p) y[std::size_t(p)] = potential_[std::size_t(p)] * x[std::size_t(p)];
  tensor_kinetic(x, y, tensor_, map_.reduced_masses, stencil_);
}

std::vector<double> InternalHamiltonian::positions(std::size_t point) const {
  std::vector<double> x;
  positions_at(tensor_, coef_, point, x);
  return x;
}

InternalHamiltonian build_internal_hamiltonian(const SystemSpec& spec, const JacobiMap& map,
                                               std::vector<Grid1D> axes) {
  return InternalHamiltonian(spec, map, std::move(axes), spec.solver.stencil);
}

InternalHamiltonian build_internal_hamiltonian(const SystemSpec& spec, const JacobiMap& map) {
  if (map.particles() > 4)
    throw Error(ErrorKind::size_exceeded, "exact solver supports at most 4 particles, got " +
                                              std::to_string(map.particles()));
  return build_internal_hamiltonian(spec, map, std::vector<Grid1D>(std::size_t(std::max(0, map.dims())),
                                                                   spec.grid.grid()));
}

// ---------------------------------------------------------------- symmetry

SymmetryGroup build_symmetry(const JacobiMap& map, const std::array<Statistics, 2>& stats,
                             const std::vector<Grid1D>& axes, int species) {
  const int n = map.particles(), d = map.dims();
  // Permutations per species as lists over that species' particle indices.
  std::vector<std::vector<std::vector<int>>> per_species;
  std::vector<bool> fermionic;
  for (int l = 0; l < 2; ++l) {
    if (species >= 0 && species != l) continue;
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (map.species[std::size_t(i)] == l) idx.push_back(i);
    if (idx.size() < 2) continue;
    std::vector<std::vector<int>> perms;
    std::vector<int> p = idx;
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    per_species.push_back(std::move(perms));
    fermionic.push_back(stats[std::size_t(l)] == Statistics::fermion);
  }

  SymmetryGroup g;
  std::vector<std::size_t> choice(per_species.size(), 0);
  for (;;) {
    std::vector<int> sigma(static_cast<std::size_t>(n));
    std::iota(sigma.begin(), sigma.end(), 0);
    double chi = 1.0;
    for (std::size_t s = 0; s < per_species.size(); ++s) {
      const auto& perm = per_species[s][choice[s]];
      const auto& ident = per_species[s][0];
      for (std::size_t k = 0; k < perm.size(); ++k) sigma[std::size_t(ident[k])] = perm[k];
      if (fermionic[s]) {
        int inversions = 0;
        for (std::size_t a = 0; a < perm.size(); ++a)
          for (std::size_t b = a + 1; b < perm.size(); ++b) inversions += perm[a] > perm[b];
        if (inversions % 2) chi = -chi;
      }
    }
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) P(i, sigma[std::size_t(i)]) = 1.0;
    const Eigen::MatrixXd full = map.forward * P * map.inverse;
    g.actions.push_back(full.block(1, 1, d, d));
    g.characters.push_back(chi);

    std::size_t s = 0;
    for (; s < per_species.size(); ++s) {
      if (++choice[s] < per_species[s].size()) break;
      choice[s] = 0;
    }
    if (s == per_species.size()) break;
  }

  // Grid-aligned when every action is a signed permutation between identical (and, for
  // reflections, symmetric) axes.
  g.aligned = true;
  for (const auto& A : g.actions) {
    for (int r = 0; r < d && g.aligned; ++r) {
      int nonzero = 0;
      for (int c = 0; c < d; ++c) {
        const double v = A(r, c);
        if (std::abs(v) < 1e-12) continue;
        ++nonzero;
        if (std::abs(std::abs(v) - 1.0) > 1e-12 || !(axes[std::size_t(r)] == axes[std::size_t(c)]) ||
            (v < 0 && !symmetric_axis(axes[std::size_t(c)])))
          g.aligned = false;
      }
      if (nonzero != 1) g.aligned = false;
    }
  }
  if (g.aligned) {
    const TensorGrid t(axes);
    for (const auto& A : g.actions) {
      std::vector<std::size_t> map_idx(t.size);
      for (std::size_t p = 0; p < t.size; ++p) {
        std::size_t src = 0;
        for (int r = 0; r < d; ++r) {
          int c = 0;
          while (std::abs(A(r, c)) < 0.5) ++c;
          std::size_t j = t.index(p, std::size_t(c));
          if (A(r, c) < 0) j = t.axes[std::size_t(c)].n - 1 - j;
          src += j * t.strides[std::size_t(r)];
        }
        map_idx[p] = src;
      }
      g.index_maps.push_back(std::move(map_idx));
    }
  }
  return g;
}

std::vector<double> apply_group_element(const std::vector<double>& amps, const SymmetryGroup& group,
                                        std::size_t element, const TensorGrid& t) {
  std::vector<double> out(t.size, 0.0);
  if (group.aligned) {
    const auto& m = group.index_maps[element];
    for (std::size_t p = 0; p < t.size; ++p) out[p] = amps[m[p]];
    return out;
  }
  const Eigen::MatrixXd& A = group.actions[element];
  const std::size_t d = t.dims();
  const long total = long(t.size);
#pragma omp parallel for schedule(static) if (total > 32768)
  for (long pl = 0; pl < total; ++pl) {
    const std::size_t p = std::size_t(pl);
    std::vector<long> base(d);
    std::vector<double> frac(d);
    for (std::size_t r = 0; r < d; ++r) {
      double y = 0.0;
      for (std::size_t c = 0; c < d; ++c) y += A(Eigen::Index(r), Eigen::Index(c)) * t.coordinate(p, c);
      const double u = (y - t.axes[r].x_min) / t.axes[r].spacing();
      base[r] = long(std::floor(u));
      frac[r] = u - double(base[r]);
    }
    double value = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t(1) << d); ++corner) {
      double w = 1.0;
      std::size_t idx = 0;
      bool inside = true;
      for (std::size_t r = 0; r < d; ++r) {
        const bool up = (corner >> r) & 1;
        const long j = base[r] + (up ? 1 : 0);
        w *= up ? frac[r] : 1.0 - frac[r];
        if (j < 0 || j >= long(t.axes[r].n)) {
          inside = false;
          break;
        }
        idx += std::size_t(j) * t.strides[r];
      }
      if (inside && w != 0.0) value += w * amps[idx];
    }
    out[p] = value;
  }
  return out;
}

std::vector<double> symmetry_project(const std::vector<double>& amps, const SymmetryGroup& group,
                                     const TensorGrid& t) {
  std::vector<double> out(t.size, 0.0);
  for (std::size_t e = 0; e < group.actions.size(); ++e) {
    const auto moved = apply_group_element(amps, group, e, t);
    for (std::size_t p = 0; p < t.size; ++p) out[p] += group.characters[e] * moved[p];
  }
  const double inv = 1.0 / double(group.actions.size());
  for (auto& v : out) v *= inv;
  return out;
}

std::vector<double> symmetry_project(const std::vector<double>& amps, const std::vector<Grid1D>& grids,
                                     const JacobiMap& map, const std::array<Statistics, 2>& stats, int species) {
  return symmetry_project(amps, build_symmetry(map, stats, grids, species), TensorGrid(grids));
}

// ---------------------------------------------------------------- ground state

namespace {

std::vector<double> random_start(const TensorGrid& t, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> v(t.size);
  for (std::size_t p = 0; p < t.size; ++p) {
    double env = 0.0;
    for (std::size_t a = 0; a < t.dims(); ++a) {
      const Grid1D& g = t.axes[a];
      const double mid = 0.5 * (g.x_min + g.x_max), width = 0.2 * (g.x_max - g.x_min);
      const double z = (t.coordinate(p, a) - mid) / width;
      env += z * z;
    }
    v[p] = uni(rng) * std::exp(-env);
  }
  return v;
}

double euclid_norm(const std::vector<double>& v) { return std::sqrt(sum_product(v, v)); }

} // namespace

InternalWavefunction solve_ground(const InternalHamiltonian& H, const SolveOptions& opt) {
  const TensorGrid& t = H.tensor();
  const SystemSpec& spec = H.spec();
  const std::array<Statistics, 2> stats{spec.species[0].statistics, spec.species[1].statistics};
  const SymmetryGroup group = build_symmetry(H.map(), stats, t.axes);
  const bool trivial_group = group.actions.size() == 1;

  const LinearOperator op = [&H](const std::vector<double>& x, std::vector<double>& y) { H.apply(x, y); };
  const auto project = [&](std::vector<double>& v) { v = symmetry_project(v, group, t); };
  const auto weight = [&](const std::vector<double>& v) { return sum_product(v, symmetry_project(v, group, t)); };

  std::mt19937_64 rng(opt.seed);
  LanczosOptions lo;
  lo.tol = opt.tol;
  if (t.size < lo.max_basis) {
    lo.max_basis = t.size;
    lo.keep = std::max<std::size_t>(1, t.size / 2);
  }

  EigenPair ground;
  double next = std::numeric_limits<double>::quiet_NaN();
  std::size_t matvecs = 0;

  if (trivial_group || group.aligned) {
    // Exact sector projector commuting with H: Lanczos stays inside the sector.
    if (!trivial_group) lo.project = project;
    ground = lowest_eigenpair(op, random_start(t, rng), lo);
    matvecs += ground.matvecs;
    if (opt.check_degeneracy && t.size > 1) {
      LanczosOptions l2 = lo;
      l2.tol = std::max(opt.tol, 1e-8);
      l2.deflate = {&ground.vector};
      try {
        const EigenPair second = lowest_eigenpair(op, random_start(t, rng), l2);
        matvecs += second.matvecs;
        next = second.value;
      } catch (const Error&) {
        // Sector exhausted by the deflated vector (tiny grids); nothing to compare.
      }
    }
  } else {
    // Approximate (interpolated) projector: walk up the spectrum and classify each state.
    std::vector<EigenPair> states;
    bool found = false;
    for (std::size_t k = 0; k < opt.max_states; ++k) {
      LanczosOptions lk = lo;
      for (const auto& s : states) lk.deflate.push_back(&s.vector);
      states.push_back(lowest_eigenpair(op, random_start(t, rng), lk));
      matvecs += states.back().matvecs;
      const double w = weight(states.back().vector);
      if (w > 0.5) {
        if (!found) {
          ground = states.back();
          found = true;
          if (!opt.check_degeneracy) break;
        } else {
          next = states.back().value;
          break;
        }
      }
    }
    if (!found)
      throw Error(ErrorKind::no_convergence, "no state of the required exchange symmetry among the lowest " +
                                                 std::to_string(opt.max_states));
  }

  if (opt.check_degeneracy && std::isfinite(next) && next - ground.value < opt.degeneracy_tol)
    throw Error(ErrorKind::degenerate_ground_state,
                "next state in the symmetry sector lies " + std::to_string(next - ground.value) + " above the ground state");

  InternalWavefunction psi;
  psi.spec = spec;
  psi.map = H.map();
  psi.grids = t.axes;
  psi.stencil = H.stencil();
  psi.matvecs = matvecs;
  psi.next_energy = next;

  std::vector<double> v = ground.vector;
  {
    const double nv = euclid_norm(v);
    for (auto& x : v) x /= nv;
  }
  // Deterministic global sign.
  double total = std::accumulate(v.begin(), v.end(), 0.0);
  double sign = total > 1e-10 ? 1.0 : (total < -1e-10 ? -1.0 : 0.0);
  if (sign == 0.0) {
    const auto it = std::max_element(v.begin(), v.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    const std::size_t peak = std::size_t(it - v.begin());
    for (std::size_t p = 0; p < v.size() && sign == 0.0; ++p)
      if (std::abs(v[p]) > 1e-3 * std::abs(v[peak])) sign = v[p] > 0 ? 1.0 : -1.0;
  }
  if (sign < 0)
    for (auto& x : v) x = -x;

  std::vector<double> hv;
  H.apply(v, hv);
  psi.energy = sum_product(v, hv);
  for (std::size_t p = 0; p < v.size(); ++p) hv[p] -= psi.energy * v[p];
  psi.residual = euclid_norm(hv);
  psi.sector_weight = trivial_group ? 1.0 : weight(v);

  double peak = 0.0;
  for (double x : v) peak = std::max(peak, std::abs(x));
  psi.symmetry_defect = 0.0;
  for (std::size_t e = 0; e < group.actions.size(); ++e) {
    const auto moved = apply_group_element(v, group, e, t);
    for (std::size_t p = 0; p < v.size(); ++p)
      psi.symmetry_defect = std::max(psi.symmetry_defect, std::abs(moved[p] - group.characters[e] * v[p]) / peak);
  }

  double edge = 0.0;
  for (std::size_t p = 0; p < t.size; ++p) {
    bool boundary = false;
    for (std::size_t a = 0; a < t.dims(); ++a) {
      const std::size_t i = t.index(p, a);
      boundary = boundary || i == 0 || i + 1 == t.axes[a].n;
    }
    if (boundary) edge = std::max(edge, v[p] * v[p]);
  }
  psi.edge_density = edge / (peak * peak);
  if (opt.edge_tol >= 0 && psi.edge_density > opt.edge_tol)
    throw Error(ErrorKind::box_too_small, "ground-state density at the box edge is " +
                                              std::to_string(psi.edge_density) + " of its peak");

  const double scale = 1.0 / std::sqrt(t.cell());
  for (auto& x : v) x *= scale;
  psi.amplitudes = std::move(v);
  return psi;
}

// ---------------------------------------------------------------- densities

double deposit_cic(std::vector<double>& bins, const Grid1D& g, double x, double w) {
  const double u = (x - g.x_min) / g.spacing();
  const double last = double(g.n - 1);
  if (u < -1e-9 || u > last + 1e-9) return w;
  const double uc = std::clamp(u, 0.0, last);
  std::size_t i = std::size_t(std::floor(uc));
  if (i >= g.n - 1) i = g.n - 2;
  const double t = uc - double(i);
  bins[i] += (1.0 - t) * w;
  bins[i + 1] += t * w;
  return 0.0;
}

double deposit_cic(Table2D& tab, double x, double y, double w) {
  const Grid1D& g = tab.grid;
  const double last = double(g.n - 1);
  const double u = (x - g.x_min) / g.spacing(), v = (y - g.x_min) / g.spacing();
  if (u < -1e-9 || u > last + 1e-9 || v < -1e-9 || v > last + 1e-9) return w;
  auto split = [&](double s, std::size_t& i, double& t) {
    const double c = std::clamp(s, 0.0, last);
    i = std::size_t(std::floor(c));
    if (i >= g.n - 1) i = g.n - 2;
    t = c - double(i);
  };
  std::size_t i, j;
  double tu, tv;
  split(u, i, tu);
  split(v, j, tv);
  tab.at(i, j) += (1 - tu) * (1 - tv) * w;
  tab.at(i + 1, j) += tu * (1 - tv) * w;
  tab.at(i, j + 1) += (1 - tu) * tv * w;
  tab.at(i + 1, j + 1) += tu * tv * w;
  return 0.0;
}

double deposit_quadratic(std::vector<double>& bins, const Grid1D& g, double x, double w) {
  const double u = (x - g.x_min) / g.spacing();
  const long j = long(std::lround(u));
  if (j < 1 || j > long(g.n) - 2) return deposit_cic(bins, g, x, w);
  const double t = u - double(j);
  bins[std::size_t(j - 1)] += 0.5 * t * (t - 1.0) * w;
  bins[std::size_t(j)] += (1.0 - t * t) * w;
  bins[std::size_t(j + 1)] += 0.5 * t * (t + 1.0) * w;
  return 0.0;
}

double Table2D::integral() const {
  const std::size_t n = grid.n;
  const double h = grid.spacing();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double wj = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
      s += wi * wj * values[i * n + j];
    }
  }
  return s * h * h;
}

GridFunction Table2D::marginal() const {
  GridFunction out(grid);
  const std::size_t n = grid.n;
  const double h = grid.spacing();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += ((j == 0 || j + 1 == n) ? 0.5 : 1.0) * values[i * n + j];
    out[i] = s * h;
  }
  return out;
}

namespace {

// Calls f(weight, positions) for every xi-grid point.
template <class F> void for_each_configuration(const InternalWavefunction& psi, F&& f) {
  const TensorGrid t = psi.tensor();
  const Eigen::MatrixXd coef = coefficients(psi.map);
  const double cell = t.cell();
  std::vector<double> x;
  for (std::size_t p = 0; p < t.size; ++p) {
    const double w = psi.amplitudes[p] * psi.amplitudes[p] * cell;
    if (w == 0.0) continue;
    positions_at(t, coef, p, x);
    f(w, x);
  }
}

void require_species(const InternalWavefunction& psi, int l) {
  if (l < 0 || l > 1 || psi.map.counts[std::size_t(l)] < 1)
    throw Error(ErrorKind::missing_species, "species " + std::to_string(l + 1) + " has no particles");
}

// |psi~(tau)|^2 * cell in tau space, and the momentum axes.
std::vector<double> momentum_weights(const InternalWavefunction& psi, std::vector<Grid1D>& kaxes) {
  std::vector<cplx> data(psi.amplitudes.begin(), psi.amplitudes.end());
  fourier_tensor(data, psi.grids);
  kaxes.clear();
  double cell = 1.0;
  for (const auto& g : psi.grids) {
    kaxes.push_back(momentum_grid(g));
    cell *= kaxes.back().spacing();
  }
  std::vector<double> w(data.size());
  for (std::size_t p = 0; p < data.size(); ++p) w[p] = std::norm(data[p]) * cell;
  return w;
}

} // namespace

GridFunction internal_density(const InternalWavefunction& psi, int l, const Grid1D& r_grid) {
  require_species(psi, l);
  std::vector<double> bins(r_grid.n, 0.0);
  for_each_configuration(psi, [&](double w, const std::vector<double>& x) {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (psi.map.species[i] == l) deposit_cic(bins, r_grid, x[i], w);
  });
  const double inv_h = 1.0 / r_grid.spacing();
  for (auto& b : bins) b *= inv_h;
  return GridFunction(r_grid, std::move(bins));
}

GridFunction internal_density(const InternalWavefunction& psi, int l) {
  return internal_density(psi, l, psi.spec.grid.grid());
}

Table2D pair_density(const InternalWavefunction& psi, int l, const Grid1D& r_grid) {
  if (l < 0 || l > 1 || psi.map.counts[std::size_t(l)] < 2)
    throw Error(ErrorKind::too_few_particles, "pair density needs at least two particles of the species");
  Table2D tab(r_grid);
  for_each_configuration(psi, [&](double w, const std::vector<double>& x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (psi.map.species[i] != l) continue;
      for (std::size_t j = 0; j < x.size(); ++j)
        if (j != i && psi.map.species[j] == l) deposit_cic(tab, x[i], x[j], w);
    }
  });
  const double inv = 1.0 / (r_grid.spacing() * r_grid.spacing());
  for (auto& v : tab.values) v *= inv;
  return tab;
}

Table2D pair_density(const InternalWavefunction& psi, int l) { return pair_density(psi, l, psi.spec.grid.grid()); }

Table2D coupling_pair_density(const InternalWavefunction& psi, const Grid1D& r_grid) {
  if (psi.map.counts[0] < 1 || psi.map.counts[1] < 1)
    throw Error(ErrorKind::missing_species, "coupling density needs both species");
  Table2D tab(r_grid);
  for_each_configuration(psi, [&](double w, const std::vector<double>& x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (psi.map.species[i] != 0) continue;
      for (std::size_t j = 0; j < x.size(); ++j)
        if (psi.map.species[j] == 1) deposit_cic(tab, x[i], x[j], w);
    }
  });
  const double inv = 1.0 / (r_grid.spacing() * r_grid.spacing());
  for (auto& v : tab.values) v *= inv;
  return tab;
}

Table2D coupling_pair_density(const InternalWavefunction& psi) {
  return coupling_pair_density(psi, psi.spec.grid.grid());
}

GridFunction momentum_density(const InternalWavefunction& psi, int l, const Grid1D& p_grid) {
  require_species(psi, l);
  std::vector<Grid1D> kaxes;
  const auto w = momentum_weights(psi, kaxes);
  const TensorGrid kt(kaxes);
  const int n = psi.map.particles(), d = psi.map.dims();
  std::vector<double> bins(p_grid.n, 0.0);
  for (std::size_t p = 0; p < kt.size; ++p) {
    if (w[p] == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      if (psi.map.species[std::size_t(i)] != l) continue;
      double pi = 0.0;
      for (int a = 0; a < d; ++a) pi += psi.map.forward(a + 1, i) * kt.coordinate(p, std::size_t(a));
      deposit_quadratic(bins, p_grid, pi, w[p]);
    }
  }
  const double inv = 1.0 / p_grid.spacing();
  for (auto& b : bins) b *= inv;
  return GridFunction(p_grid, std::move(bins));
}

GridFunction momentum_density(const InternalWavefunction& psi, int l) {
  return momentum_density(psi, l, momentum_grid(psi.grids.front()));
}

DensitySet compute_densities(const InternalWavefunction& psi, const Grid1D& r_grid) {
  DensitySet d;
  for (int l = 0; l < 2; ++l) {
    const int c = psi.map.counts[std::size_t(l)];
    if (c >= 1) {
      d.rho[std::size_t(l)] = internal_density(psi, l, r_grid);
      d.rho_p[std::size_t(l)] = momentum_density(psi, l);
    }
    if (c >= 2) d.gamma[std::size_t(l)] = pair_density(psi, l, r_grid);
  }
  if (psi.map.counts[0] >= 1 && psi.map.counts[1] >= 1) d.gamma12 = coupling_pair_density(psi, r_grid);
  return d;
}

// ---------------------------------------------------------------- kinetic energies

double interacting_kinetic(const InternalWavefunction& psi, KineticMethod method) {
  if (method == KineticMethod::stencil) {
    const TensorGrid t = psi.tensor();
    std::vector<double> y(t.size, 0.0);
    tensor_kinetic(psi.amplitudes, y, t, psi.map.reduced_masses, psi.stencil);
    return sum_product(psi.amplitudes, y) * t.cell();
  }
  std::vector<Grid1D> kaxes;
  const auto w = momentum_weights(psi, kaxes);
  const TensorGrid kt(kaxes);
  double s = 0.0;
  for (std::size_t p = 0; p < kt.size; ++p) {
    double e = 0.0;
    for (std::size_t a = 0; a < kt.dims(); ++a) {
      const double k = kt.coordinate(p, a);
      e += k * k / (2.0 * psi.map.reduced_masses[a]);
    }
    s += w[p] * e;
  }
  return s;
}

std::array<double, 2> species_kinetic(const InternalWavefunction& psi) {
  const TensorGrid t = psi.tensor();
  const std::size_t d = t.dims();
  const double cell = t.cell();
  // <psi| -D_a^2 |psi> and <D_a psi | D_b psi>.
  std::vector<double> second(d);
  std::vector<std::vector<double>> grad(d);
  for (std::size_t a = 0; a < d; ++a) {
    std::vector<double> y(t.size, 0.0);
    add_axis_stencil(psi.amplitudes, y, t, a, laplacian_stencil(psi.stencil, t.axes[a].spacing()), -1.0);
    second[a] = sum_product(psi.amplitudes, y) * cell;
    grad[a].assign(t.size, 0.0);
    add_axis_stencil(psi.amplitudes, grad[a], t, a, first_derivative_stencil(psi.stencil, t.axes[a].spacing()), 1.0);
  }
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(Eigen::Index(d), Eigen::Index(d));
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a + 1; b < d; ++b) {
      G(Eigen::Index(a), Eigen::Index(b)) = sum_product(grad[a], grad[b]) * cell;
      G(Eigen::Index(b), Eigen::Index(a)) = G(Eigen::Index(a), Eigen::Index(b));
    }
  std::array<double, 2> out{};
  for (int i = 0; i < psi.map.particles(); ++i) {
    double p2 = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      const double ca = psi.map.forward(Eigen::Index(a + 1), i);
      p2 += ca * ca * second[a];
      for (std::size_t b = 0; b < d; ++b)
        if (b != a) p2 += ca * psi.map.forward(Eigen::Index(b + 1), i) * G(Eigen::Index(a), Eigen::Index(b));
    }
    out[std::size_t(psi.map.species[std::size_t(i)])] += p2 / (2.0 * psi.map.masses[std::size_t(i)]);
  }
  return out;
}

std::array<double, 2> species_kinetic_spectral(const InternalWavefunction& psi) {
  std::vector<Grid1D> kaxes;
  const auto w = momentum_weights(psi, kaxes);
  const TensorGrid kt(kaxes);
  const int n = psi.map.particles();
  std::array<double, 2> out{};
  for (std::size_t p = 0; p < kt.size; ++p)
    for (int i = 0; i < n; ++i) {
      double pi = 0.0;
      for (std::size_t a = 0; a < kt.dims(); ++a) pi += psi.map.forward(Eigen::Index(a + 1), i) * kt.coordinate(p, a);
      out[std::size_t(psi.map.species[std::size_t(i)])] += w[p] * pi * pi / (2.0 * psi.map.masses[std::size_t(i)]);
    }
  return out;
}

// ---------------------------------------------------------------- expectations

double direct_expectation(const InternalWavefunction& psi,
                          const std::function<double(const std::vector<double>&)>& f) {
  double s = 0.0;
  for_each_configuration(psi, [&](double w, const std::vector<double>& x) { s += w * f(x); });
  return s;
}

double lab_frame_expectation(const InternalWavefunction& psi,
                             const std::function<double(const std::vector<double>&)>& f, std::size_t n_lab) {
  const int n = psi.map.particles(), d = psi.map.dims();
  if (n != 2 && n != 3) throw Error(ErrorKind::dimension_mismatch, "laboratory integral implemented for N = 2, 3");

  // Fourier coefficients for trigonometric interpolation of psi.
  std::vector<cplx> coef(psi.amplitudes.begin(), psi.amplitudes.end());
  fourier_tensor(coef, psi.grids);
  std::vector<Grid1D> kaxes;
  double kcell = 1.0;
  for (const auto& g : psi.grids) {
    kaxes.push_back(momentum_grid(g));
    kcell *= kaxes.back().spacing();
  }
  const TensorGrid kt(kaxes);
  const double norm = kcell / std::pow(2.0 * std::numbers::pi, 0.5 * d);

  // Laboratory box covering every c.m.-frame position reachable from the xi box.
  const Eigen::MatrixXd c = coefficients(psi.map);
  double reach = 0.0;
  for (int i = 0; i < n; ++i) {
    double r = 0.0;
    for (int a = 0; a < d; ++a)
      r += std::abs(c(i, a)) * std::max(std::abs(psi.grids[std::size_t(a)].x_min), std::abs(psi.grids[std::size_t(a)].x_max));
    reach = std::max(reach, r);
  }
  const Grid1D lab = make_grid(-reach, reach, long(n_lab));
  const double m_last = psi.map.masses[std::size_t(n - 1)];

  auto psi_at = [&](const std::vector<double>& xi) -> double {
    for (int a = 0; a < d; ++a) {
      const Grid1D& g = psi.grids[std::size_t(a)];
      if (xi[std::size_t(a)] < g.x_min || xi[std::size_t(a)] > g.x_max) return 0.0;
    }
    std::vector<std::vector<cplx>> phase(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
      const Grid1D& k = kaxes[std::size_t(a)];
      phase[std::size_t(a)].resize(k.n);
      for (std::size_t m = 0; m < k.n; ++m) phase[std::size_t(a)][m] = std::polar(1.0, k.x(m) * xi[std::size_t(a)]);
    }
    cplx s = 0.0;
    if (d == 1) {
      for (std::size_t m = 0; m < kt.size; ++m) s += coef[m] * phase[0][m];
    } else {
      const std::size_t n1 = kaxes[1].n;
      for (std::size_t m0 = 0; m0 < kaxes[0].n; ++m0) {
        cplx inner = 0.0;
        for (std::size_t m1 = 0; m1 < n1; ++m1) inner += coef[m0 * n1 + m1] * phase[1][m1];
        s += inner * phase[0][m0];
      }
    }
    return std::real(s) * norm;
  };

  const std::size_t free_vars = std::size_t(n - 1);
  std::size_t total = 1;
  for (std::size_t v = 0; v < free_vars; ++v) total *= lab.n;
  std::vector<double> partial(total, 0.0);
  const long tl = long(total);
#pragma omp parallel for schedule(dynamic, 16)
  for (long pl = 0; pl < tl; ++pl) {
    std::size_t p = std::size_t(pl);
    std::vector<double> x(static_cast<std::size_t>(n));
    double w = 1.0, msum = 0.0;
    for (std::size_t v = free_vars; v-- > 0;) {
      const std::size_t i = p % lab.n;
      p /= lab.n;
      x[v] = lab.x(i);
      w *= (i == 0 || i + 1 == lab.n) ? 0.5 : 1.0;
    }
    for (std::size_t v = 0; v < free_vars; ++v) msum += psi.map.masses[v] * x[v];
    x[std::size_t(n - 1)] = -msum / m_last;
    const InternalPoint q = to_internal(psi.map, x);
    const double amp = psi_at(q.xi);
    partial[std::size_t(pl)] = w * amp * amp * f(x);
  }
  double s = 0.0;
  for (double v : partial) s += v;
  const double jac = std::abs(psi.map.forward.determinant()) * psi.map.total_mass / m_last;
  return s * std::pow(lab.spacing(), double(free_vars)) * jac;
}

double one_body_moment(const InternalWavefunction& psi, int l, const std::function<double(double)>& f) {
  double s = 0.0;
  for_each_configuration(psi, [&](double w, const std::vector<double>& x) {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (psi.map.species[i] == l) s += w * f(x[i]);
  });
  return s;
}

double measure_hartree(const InternalWavefunction& psi, int la, int lb, const PotentialSpec& u) {
  if (u.kind == PairKind::none) return 0.0;
  if (psi.map.counts[std::size_t(la)] < 1 || psi.map.counts[std::size_t(lb)] < 1) return 0.0;
  double lo = INFINITY, hi = -INFINITY;
  for_each_configuration(psi, [&](double, const std::vector<double>& x) {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (psi.map.species[i] == la || psi.map.species[i] == lb) {
        lo = std::min(lo, x[i]);
        hi = std::max(hi, x[i]);
      }
  });
  const std::size_t nf = 4097;
  const double pad = 4.0 * (hi - lo) / double(nf) + 1e-9;
  const Grid1D fine{lo - pad, hi + pad, nf};
  std::vector<double> a(nf, 0.0), b(nf, 0.0);
  for_each_configuration(psi, [&](double w, const std::vector<double>& x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (psi.map.species[i] == la) deposit_quadratic(a, fine, x[i], w);
      if (psi.map.species[i] == lb) deposit_quadratic(b, fine, x[i], w);
    }
  });
  const double h = fine.spacing();
  std::vector<double> table(2 * nf - 1);
  for (std::size_t k = 0; k < table.size(); ++k) table[k] = eval_pair_potential(u, (double(k) - double(nf - 1)) * h);
  std::vector<double> rows(nf, 0.0);
  const long nl = long(nf);
#pragma omp parallel for schedule(static)
  for (long j = 0; j < nl; ++j) {
    if (a[std::size_t(j)] == 0.0) continue;
    double s = 0.0;
    for (std::size_t k = 0; k < nf; ++k) s += b[k] * table[std::size_t(j) + nf - 1 - k];
    rows[std::size_t(j)] = a[std::size_t(j)] * s;
  }
  double e = 0.0;
  for (double r : rows) e += r;
  return la == lb ? 0.5 * e : e;
}

// ---------------------------------------------------------------- laboratory density

double CMWavepacket::density(double R) const {
  const double z = (R - center) / width;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * width);
}

GridFunction lab_density_convolve(const GridFunction& rho_int, const CMWavepacket& gamma) {
  const Grid1D& g = rho_int.grid;
  const std::size_t n = g.n;
  const double h = g.spacing();
  std::vector<double> tw(n, h);
  tw.front() = tw.back() = 0.5 * h;
  GridFunction out(g);
  // Kernel columns normalized on the grid so the total weight is preserved exactly.
  for (std::size_t k = 0; k < n; ++k) {
    if (rho_int[k] == 0.0) continue;
    double z = 0.0;
    std::vector<double> col(n);
    for (std::size_t j = 0; j < n; ++j) {
      col[j] = gamma.density(g.x(j) - g.x(k));
      z += tw[j] * col[j];
    }
    if (!(z > 0)) continue;
    for (std::size_t j = 0; j < n; ++j) out[j] += tw[k] * rho_int[k] * col[j] / z;
  }
  return out;
}

// ---------------------------------------------------------------- oracle and breakdown

ExactOracle make_oracle(const InternalWavefunction& psi, const Grid1D& r_grid) {
  ExactOracle o;
  o.energy = psi.energy;
  o.counts = psi.map.counts;
  o.kinetic = species_kinetic(psi);
  for_each_configuration(psi, [&](double w, const std::vector<double>& x) {
    const PotentialTerms t = potential_terms(psi.spec, psi.map.species, x);
    for (std::size_t l = 0; l < 2; ++l) {
      o.intra_interaction[l] += w * t.intra[l];
      o.vint[l] += w * t.vint[l];
    }
    o.coupling_interaction += w * t.coupling;
  });
  for (int l = 0; l < 2; ++l) o.hartree[std::size_t(l)] = measure_hartree(psi, l, l, psi.spec.intra(l));
  o.hartree12 = measure_hartree(psi, 0, 1, psi.spec.u12);
  o.densities = compute_densities(psi, r_grid);
  return o;
}

ExactOracle make_oracle(const InternalWavefunction& psi) { return make_oracle(psi, psi.spec.grid.grid()); }

EnergyBreakdown energy_breakdown_exact(const ExactOracle& o, std::optional<std::array<double, 2>> ks_kinetic) {
  EnergyBreakdown b;
  for (std::size_t l = 0; l < 2; ++l) {
    b.hartree[l] = o.hartree[l];
    b.xc_interaction[l] = o.intra_interaction[l] - o.hartree[l];
    b.vint[l] = o.vint[l];
    if (ks_kinetic) {
      b.ks_kinetic[l] = (*ks_kinetic)[l];
      b.xc_kinetic[l] = o.kinetic[l] - (*ks_kinetic)[l];
    } else {
      b.ks_kinetic[l] = 0.0;
      b.xc_kinetic[l] = o.kinetic[l];
    }
  }
  b.ks_kinetic_symbolic = !ks_kinetic.has_value();
  b.hartree12 = o.hartree12;
  b.c12 = o.coupling_interaction - o.hartree12;
  b.close();
  return b;
}

EnergyBreakdown energy_breakdown_exact(const InternalWavefunction& psi) {
  return energy_breakdown_exact(make_oracle(psi));
}

} // namespace idft
