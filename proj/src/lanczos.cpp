#include "idft/lanczos.hpp"
#include "idft/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>

namespace idft {

namespace {

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double norm(const std::vector<double>& a) { return std::sqrt(dotv(a, a)); }

// Two passes of classical Gram-Schmidt against the deflation set and the basis.
void orthogonalize(std::vector<double>& w, const std::vector<std::vector<double>>& basis,
                   const std::vector<const std::vector<double>*>& deflate) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto* d : deflate) axpy(-dotv(*d, w), *d, w);
    for (const auto& v : basis) axpy(-dotv(v, w), v, w);
  }
}

} // namespace

EigenPair lowest_eigenpair(const LinearOperator& op, std::vector<double> start, const LanczosOptions& opt) {
  const std::size_t n = start.size();
  std::vector<std::vector<double>> V, W;
  Eigen::MatrixXd T(0, 0);
  EigenPair out;

  std::vector<double> next = std::move(start);
  if (opt.project) opt.project(next);
  orthogonalize(next, V, opt.deflate);
  double nn = norm(next);
  if (!(nn > 0)) throw Error(ErrorKind::no_convergence, "start vector vanishes after projection");

  std::size_t since_projection = 0;
  double best_residual = INFINITY;
  for (;;) {
    for (auto& x : next) x /= nn;
    std::vector<double> w(n);
    op(next, w);
    ++out.matvecs;
    V.push_back(std::move(next));
    W.push_back(std::move(w));

    const Eigen::Index m = Eigen::Index(V.size());
    T.conservativeResize(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double t = dotv(V[std::size_t(i)], W[std::size_t(m - 1)]);
      T(i, m - 1) = t;
      T(m - 1, i) = t;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const double theta = es.eigenvalues()(0);
    const Eigen::VectorXd s = es.eigenvectors().col(0);

    std::vector<double> x(n, 0.0), r(n, 0.0);
    for (Eigen::Index i = 0; i < m; ++i) {
      axpy(s(i), V[std::size_t(i)], x);
      axpy(s(i), W[std::size_t(i)], r);
    }
    axpy(-theta, x, r);
    const double res = norm(r);
    best_residual = std::min(best_residual, res);

    if (res <= opt.tol) {
      const double xn = norm(x);
      for (auto& v : x) v /= xn;
      out.value = theta;
      out.vector = std::move(x);
      out.residual = res;
      out.residual_history.push_back(res);
      return out;
    }
    if (out.matvecs >= opt.max_matvec) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "Lanczos stalled after %zu products, residual %.3e (target %.1e)",
                    out.matvecs, best_residual, opt.tol);
      throw Error(ErrorKind::no_convergence, buf);
    }

    if (std::size_t(m) >= opt.max_basis) {
      // Thick restart: keep the lowest Ritz vectors, whose residuals share one direction.
      const std::size_t k = std::min<std::size_t>(opt.keep, std::size_t(m));
      std::vector<std::vector<double>> V2(k, std::vector<double>(n, 0.0)), W2(k, std::vector<double>(n, 0.0));
      for (std::size_t c = 0; c < k; ++c)
        for (Eigen::Index i = 0; i < m; ++i) {
          const double coef = es.eigenvectors()(i, Eigen::Index(c));
          axpy(coef, V[std::size_t(i)], V2[c]);
          axpy(coef, W[std::size_t(i)], W2[c]);
        }
      V = std::move(V2);
      W = std::move(W2);
      T = es.eigenvalues().head(Eigen::Index(k)).asDiagonal();
      out.residual_history.push_back(res);
    }

    next = std::move(r);
    if (opt.project && ++since_projection >= opt.project_every) {
      opt.project(next);
      since_projection = 0;
    }
    orthogonalize(next, V, opt.deflate);
    nn = norm(next);
    if (!(nn > 1e-14 * (1.0 + std::abs(theta)))) {
      // Invariant subspace reached; the Ritz pair is exact to rounding.
      const double xn = norm(x);
      for (auto& v : x) v /= xn;
      out.value = theta;
      out.vector = std::move(x);
      out.residual = res;
      return out;
    }
  }
}

} // namespace idft
