#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstddef>
#include <functional>

#include "nelson/lanczos.hpp"

namespace nelson::spectral {

using StateVector = Eigen::VectorXcd;
using SparseComplexMatrix = Eigen::SparseMatrix<std::complex<double>, Eigen::RowMajor>;

struct GroundState {
  double energy = 0.0;
  StateVector psi;  // unit norm
  double eig_residual = 0.0;
  std::size_t iterations = 0;
  // Weight on configurations at the total-number cap; filled by the model
  // layer, which knows the Fock structure.
  double tail_weight = 0.0;
  double gap_estimate = 0.0;
};

// Lowest eigenpair from the normalized all-ones seed.
GroundState lanczos_ground(const SparseComplexMatrix& h, const LanczosOptions& opt = {});

struct ShiftedSolveOptions {
  double tol = 1e-12;  // relative residual
  std::size_t max_iter = 20000;
  // Smallest shift a caller is allowed to pass; pull-through sites use the
  // lowest mode frequency.
  double min_shift = 0.0;
};

struct ShiftedSolution {
  StateVector y;
  double relative_residual = 0.0;
  std::size_t iterations = 0;
};

// Solves (H - energy + shift) y = rhs by Jacobi-preconditioned conjugate
// gradients. `energy` must be the ground energy of H so the system is
// positive definite; a non-positive curvature direction raises
// ShiftTooSmallError.
ShiftedSolution shifted_solve(const SparseComplexMatrix& h, double energy, double shift,
                              const StateVector& rhs, const ShiftedSolveOptions& opt = {});

using OperatorApply = std::function<StateVector(const StateVector&)>;

// Re <psi, A psi>. Logs a warning when the imaginary part exceeds `warn` and
// throws DiagnosticsError beyond `fail`.
double expectation(const StateVector& psi, const OperatorApply& apply, double warn = 1e-10,
                   double fail = 1e-8);

}  // namespace nelson::spectral
