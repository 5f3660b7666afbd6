#include "idft/grid.hpp"
#include "idft/error.hpp"

#include <fftw3.h>
#include <lapacke.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

namespace idft {

namespace {
std::mutex fftw_planner_mutex; // FFTW planning is not thread safe

using cplx = std::complex<double>;
} // namespace

template <class T>
BasicGridFunction<T>::BasicGridFunction(const Grid1D& g, std::vector<T> v) : grid(g), values(std::move(v)) {
  if (values.size() != g.n)
    throw Error(ErrorKind::dimension_mismatch, "grid function has " + std::to_string(values.size()) +
                                                   " values for " + std::to_string(g.n) + " points");
}
template struct BasicGridFunction<double>;
template struct BasicGridFunction<cplx>;

Grid1D make_grid(double x_min, double x_max, long n) {
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max))
    throw Error(ErrorKind::invalid_extent, "grid needs x_max > x_min");
  if (n < 8) throw Error(ErrorKind::invalid_extent, "grid needs at least 8 points");
  return Grid1D{x_min, x_max, std::size_t(n)};
}

std::vector<double> laplacian_stencil(int order, double h) {
  const double h2 = h * h;
  if (order == 3) return {1.0 / h2, -2.0 / h2, 1.0 / h2};
  if (order == 5)
    return {-1.0 / (12 * h2), 16.0 / (12 * h2), -30.0 / (12 * h2), 16.0 / (12 * h2), -1.0 / (12 * h2)};
  throw Error(ErrorKind::validation_error, "stencil must be 3 or 5");
}

GridFunction kinetic_apply(const GridFunction& f, double mass, int order) {
  if (!(mass > 0)) throw Error(ErrorKind::validation_error, "mass must be positive");
  const auto w = laplacian_stencil(order, f.grid.spacing());
  const long half = long(w.size() / 2), n = long(f.size());
  const double pre = -0.5 / mass;
  GridFunction out(f.grid);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long o = -half; o <= half; ++o) {
      const long j = i + o;
      if (j >= 0 && j < n) acc += w[std::size_t(o + half)] * f.values[std::size_t(j)];
    }
    out.values[std::size_t(i)] = pre * acc;
  }
  return out;
}

template <class T> static T trapezoid(const BasicGridFunction<T>& f) {
  if (f.size() == 0) return T{};
  T acc{};
  for (const auto& v : f.values) acc += v;
  acc -= 0.5 * (f.values.front() + f.values.back());
  return acc * f.grid.spacing();
}

double integrate(const GridFunction& f) { return trapezoid(f); }
double integrate(const ComplexGridFunction& f) { return std::real(trapezoid(f)); }

double dot(const GridFunction& f, const GridFunction& g) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * g[i];
  return acc * f.grid.spacing();
}

double l1_distance(const GridFunction& a, const GridFunction& b) {
  GridFunction d(a.grid);
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = std::abs(a[i] - b[i]);
  return integrate(d);
}

Grid1D momentum_grid(const Grid1D& g) {
  const double dk = 2.0 * std::numbers::pi / (double(g.n) * g.spacing());
  const double s = double(g.n / 2);
  return Grid1D{-s * dk, (double(g.n) - 1.0 - s) * dk, g.n};
}

void fourier_tensor(std::vector<cplx>& data, const std::vector<Grid1D>& axes, bool inverse) {
  const int rank = int(axes.size());
  std::vector<int> dims(axes.size());
  std::size_t total = 1;
  for (int a = 0; a < rank; ++a) {
    dims[std::size_t(a)] = int(axes[std::size_t(a)].n);
    total *= axes[std::size_t(a)].n;
  }
  if (data.size() != total) throw Error(ErrorKind::dimension_mismatch, "tensor size does not match axes");

  // Forward: F(k_m) = h/sqrt(2pi) exp(-i k_m x0) sum_j f_j exp(-2 pi i (m - s) j / n).
  // The (m - s) shift is a pre-multiplication by exp(2 pi i s j / n).
  // Inverse (input on momentum grid, output on position grid) mirrors it.
  std::vector<std::vector<cplx>> pre(axes.size()), post(axes.size());
  double scale = 1.0;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    const Grid1D& g = axes[a];
    const Grid1D k = momentum_grid(g);
    const std::size_t n = g.n, s = n / 2;
    pre[a].resize(n);
    post[a].resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      if (!inverse) {
        pre[a][j] = std::polar(1.0, 2.0 * std::numbers::pi * double(s * j % n) / double(n));
        post[a][j] = std::polar(1.0, -k.x(j) * g.x_min);
      } else {
        pre[a][j] = std::polar(1.0, k.x(j) * g.x_min);
        post[a][j] = std::polar(1.0, -2.0 * std::numbers::pi * double(s * j % n) / double(n));
      }
    }
    scale *= inverse ? (k.spacing() / std::sqrt(2.0 * std::numbers::pi))
                     : (g.spacing() / std::sqrt(2.0 * std::numbers::pi));
  }

  auto apply_axis_factors = [&](const std::vector<std::vector<cplx>>& fac) {
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t p = 0; p < total; ++p) {
      cplx f = 1.0;
      for (std::size_t a = 0; a < axes.size(); ++a) f *= fac[a][idx[a]];
      data[p] *= f;
      for (std::size_t a = axes.size(); a-- > 0;) {
        if (++idx[a] < axes[a].n) break;
        idx[a] = 0;
      }
    }
  };

  apply_axis_factors(pre);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    plan = fftw_plan_dft(rank, dims.data(), ptr, ptr, inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex);
    fftw_destroy_plan(plan);
  }
  apply_axis_factors(post);
  for (auto& v : data) v *= scale;
}

ComplexGridFunction fourier(const ComplexGridFunction& f) {
  std::vector<cplx> data = f.values;
  fourier_tensor(data, {f.grid});
  return ComplexGridFunction(momentum_grid(f.grid), std::move(data));
}

ComplexGridFunction fourier(const GridFunction& f) {
  return fourier(ComplexGridFunction(f.grid, std::vector<cplx>(f.values.begin(), f.values.end())));
}

ComplexGridFunction inverse_fourier(const ComplexGridFunction& ft, const Grid1D& position_grid) {
  if (!(momentum_grid(position_grid) == ft.grid))
    throw Error(ErrorKind::dimension_mismatch, "momentum grid does not pair with the position grid");
  std::vector<cplx> data = ft.values;
  fourier_tensor(data, {position_grid}, true);
  return ComplexGridFunction(position_grid, std::move(data));
}

Eigenstates lowest_states(const GridFunction& v, double mass, int order, std::size_t count) {
  const lapack_int n = lapack_int(v.size());
  if (count == 0 || count > v.size())
    throw Error(ErrorKind::dimension_mismatch, "requested eigenstate count out of range");
  if (!(mass > 0)) throw Error(ErrorKind::validation_error, "mass must be positive");
  const auto w = laplacian_stencil(order, v.grid.spacing());
  const lapack_int kd = lapack_int(w.size() / 2);
  const lapack_int ldab = kd + 1;
  const double pre = -0.5 / mass;
  std::vector<double> ab(std::size_t(ldab * n), 0.0);
  // Upper band storage: A(i, j) at ab[kd + i - j + j * ldab], i <= j.
  for (lapack_int j = 0; j < n; ++j) {
    for (lapack_int o = 0; o <= kd; ++o) {
      const lapack_int i = j - o;
      if (i < 0) continue;
      double a = pre * w[std::size_t(kd - o)];
      if (o == 0) a += v[std::size_t(j)];
      ab[std::size_t(kd + i - j + j * ldab)] = a;
    }
  }
  // Eigenvalues only (no O(n^3) transformation matrix), then vectors by inverse iteration.
  std::vector<double> band = ab;
  std::vector<double> values(static_cast<std::size_t>(n));
  std::vector<lapack_int> ifail(static_cast<std::size_t>(n));
  double q_dummy = 0.0, z_dummy = 0.0;
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'N', 'I', 'U', n, kd, band.data(), ldab, &q_dummy, 1,
                                         0.0, 0.0, 1, lapack_int(count), 0.0, &found, values.data(), &z_dummy, 1,
                                         ifail.data());
  if (info != 0 || found != lapack_int(count))
    throw Error(ErrorKind::no_convergence, "banded eigensolver failed (info " + std::to_string(info) + ")");

  // General band storage for (A - s I): ldgb = 2 kl + ku + 1 with kl = ku = kd.
  const lapack_int ldgb = 3 * kd + 1;
  auto full = [&](lapack_int i, lapack_int j) {
    const lapack_int lo = std::min(i, j), hi = std::max(i, j);
    return ab[std::size_t(kd + lo - hi + hi * ldab)];
  };
  double scale = 0.0;
  for (lapack_int j = 0; j < n; ++j) scale = std::max(scale, std::abs(full(j, j)) + 2 * std::abs(pre * w[0]) * kd);

  Eigenstates out;
  std::vector<std::vector<double>> found_vecs;
  for (std::size_t c = 0; c < count; ++c) {
    const double shift = values[c] + 1e-13 * scale * (1.0 + double(c % 3));
    std::vector<double> gb(std::size_t(ldgb * n), 0.0);
    for (lapack_int j = 0; j < n; ++j)
      for (lapack_int i = std::max<lapack_int>(0, j - kd); i <= std::min(n - 1, j + kd); ++i)
        gb[std::size_t(2 * kd + i - j + j * ldgb)] = full(i, j) - (i == j ? shift : 0.0);
    std::vector<lapack_int> piv(static_cast<std::size_t>(n));
    lapack_int f_info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kd, kd, gb.data(), ldgb, piv.data());
    if (f_info < 0) throw Error(ErrorKind::no_convergence, "banded factorization failed");
    if (f_info > 0) gb[std::size_t(2 * kd + (f_info - 1) * ldgb + kd)] = 1e-300; // exact singularity: nudge the pivot
    std::vector<double> x(static_cast<std::size_t>(n));
    for (lapack_int i = 0; i < n; ++i) x[std::size_t(i)] = 1.0 + 0.1 * std::sin(0.7 * double(i) + double(c));
    for (int it = 0; it < 4; ++it) {
      LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n, kd, kd, 1, gb.data(), ldgb, piv.data(), x.data(), n);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& prev : found_vecs) {
          double d = 0.0;
          for (lapack_int i = 0; i < n; ++i) d += prev[std::size_t(i)] * x[std::size_t(i)];
          for (lapack_int i = 0; i < n; ++i) x[std::size_t(i)] -= d * prev[std::size_t(i)];
        }
      double nrm = 0.0;
      for (double e : x) nrm += e * e;
      nrm = std::sqrt(nrm);
      for (double& e : x) e /= nrm;
    }
    found_vecs.push_back(x);
  }

  const double norm = 1.0 / std::sqrt(v.grid.spacing());
  for (std::size_t c = 0; c < count; ++c) {
    out.values.push_back(values[c]);
    GridFunction phi(v.grid);
    double sum = 0.0;
    for (lapack_int i = 0; i < n; ++i) {
      phi[std::size_t(i)] = found_vecs[c][std::size_t(i)] * norm;
      sum += phi[std::size_t(i)];
    }
    // Deterministic sign: positive total weight, else positive first significant entry.
    double sign = sum > 1e-12 ? 1.0 : (sum < -1e-12 ? -1.0 : 0.0);
    if (sign == 0.0) {
      for (lapack_int i = 0; i < n && sign == 0.0; ++i)
        if (std::abs(phi[std::size_t(i)]) > 1e-8) sign = phi[std::size_t(i)] > 0 ? 1.0 : -1.0;
      if (sign == 0.0) sign = 1.0;
    }
    for (auto& x : phi.values) x *= sign;
    out.vectors.push_back(std::move(phi));
  }
  return out;
}

} // namespace idft
