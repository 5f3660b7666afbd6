#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace idft {

using LinearOperator = std::function<void(const std::vector<double>&, std::vector<double>&)>;
using Projector = std::function<void(std::vector<double>&)>;

struct LanczosOptions {
  double tol = 1e-9;          // Euclidean residual norm of the unit Ritz vector
  std::size_t max_basis = 80; // basis size that triggers a thick restart
  std::size_t keep = 20;      // Ritz vectors retained across a restart
  std::size_t max_matvec = 40000;
  std::size_t project_every = 10;
  Projector project;                               // optional symmetry projector
  std::vector<const std::vector<double>*> deflate; // orthonormal vectors to exclude
};

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector; // Euclidean unit norm
  double residual = 0.0;
  std::size_t matvecs = 0;
  std::vector<double> residual_history; // one entry per restart cycle
};

// Lowest eigenpair of a symmetric operator by thick-restart Lanczos.
// Throws no-convergence when the residual target is not reached.
EigenPair lowest_eigenpair(const LinearOperator& op, std::vector<double> start, const LanczosOptions& opt);

} // namespace idft
