#include <cmath>
#include <string>

#include "nelson/errors.hpp"
#include "nelson/spectral.hpp"

namespace nelson::spectral {

ShiftedSolution shifted_solve(const SparseComplexMatrix& h, double energy, double shift,
                              const StateVector& rhs, const ShiftedSolveOptions& opt) {
  if (!(shift > 0.0)) throw ShiftTooSmallError("shift must be positive", shift);
  if (shift < opt.min_shift) {
    throw ShiftTooSmallError("shift " + std::to_string(shift) + " below the allowed minimum " +
                                 std::to_string(opt.min_shift),
                             shift);
  }
  const auto n = h.rows();
  if (rhs.size() != n) throw Error("shifted_solve: rhs size mismatch");

  ShiftedSolution sol;
  sol.y = StateVector::Zero(n);
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return sol;

  const double offset = shift - energy;
  // Diagonal entries are Rayleigh quotients of H, hence >= energy, so the
  // preconditioner is positive whenever the system is.
  Eigen::VectorXd inv_diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = h.coeff(i, i).real() + offset;
    if (!(d > 0.0)) {
      throw ShiftTooSmallError("diagonal entry " + std::to_string(i) + " of H - E + shift is " +
                                   std::to_string(d),
                               d);
    }
    inv_diag(i) = 1.0 / d;
  }

  auto apply = [&](const StateVector& v, StateVector& out) {
    out.noalias() = h * v;
    out += offset * v;
  };

  StateVector r = rhs;
  StateVector z(n), p(n), ap(n);
  // Restart from the true residual if recurrence drift stalls the check.
  for (int cycle = 0; cycle < 4; ++cycle) {
    z = inv_diag.cwiseProduct(r);
    p = z;
    std::complex<double> rz = r.dot(z);
    while (sol.iterations < opt.max_iter) {
      apply(p, ap);
      ++sol.iterations;
      const double curvature = p.dot(ap).real();
      const double pnorm2 = p.squaredNorm();
      if (!(curvature > 0.0)) {
        throw ShiftTooSmallError("negative curvature in shifted solve, Rayleigh quotient " +
                                     std::to_string(curvature / pnorm2),
                                 curvature / pnorm2);
      }
      const std::complex<double> alpha = rz / curvature;
      sol.y += alpha * p;
      r -= alpha * ap;
      if (r.norm() <= 0.5 * opt.tol * rhs_norm) break;
      z = inv_diag.cwiseProduct(r);
      const std::complex<double> rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    apply(sol.y, ap);
    r = rhs - ap;
    sol.relative_residual = r.norm() / rhs_norm;
    if (sol.relative_residual <= opt.tol) return sol;
    if (sol.iterations >= opt.max_iter) break;
  }
  throw ConvergenceError("shifted solve did not reach relative residual " + std::to_string(opt.tol),
                         sol.relative_residual);
}

}  // namespace nelson::spectral
