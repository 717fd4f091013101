#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nelson/errors.hpp"
#include "nelson/ircheck.hpp"

namespace nelson::ircheck {

namespace {

void check_inputs(const GroundState& gs, const NelsonMatrix& h, const PlaneWaveSet& waves) {
  if (static_cast<std::size_t>(gs.psi.size()) != h.dim()) {
    throw Error("ground state does not belong to this matrix");
  }
  if (waves.basis_hash != h.basis_hash || waves.modes_hash != h.modes_hash) {
    throw ProvenanceError("plane waves were not used to assemble this matrix");
  }
}

// (H - E + omega_j)^-1 rhs
StateVector resolvent(const GroundState& gs, const NelsonMatrix& h, std::size_t j,
                      const StateVector& rhs, const SolverTolerances& tol) {
  const auto opt = tol.shifted(h.modes->min_frequency());
  return spectral::shifted_solve(h.matrix, gs.energy, h.modes->modes[j].omega, rhs, opt).y;
}

}  // namespace

PullThroughReport pull_through_residual(const GroundState& gs, const NelsonMatrix& h,
                                        const PlaneWaveSet& waves, const SolverTolerances& tol) {
  check_inputs(gs, h, waves);
  const std::size_t nmodes = h.modes->size();
  PullThroughReport rep;
  rep.norms.reserve(nmodes);
  for (std::size_t j = 0; j < nmodes; ++j) {
    StateVector r = model::apply_mode_annihilation(h, j, gs.psi);
    if (h.q != 0.0) {
      const StateVector dressed = model::apply_atomic(h, waves.matrices[j], gs.psi);
      r += (h.q * h.modes->modes[j].coupling()) * resolvent(gs, h, j, dressed, tol);
    }
    const double norm = r.norm();
    rep.norms.push_back(norm);
    rep.max = std::max(rep.max, norm);
    rep.mean += norm;
    rep.sum_squares += norm * norm;
  }
  if (nmodes > 0) rep.mean /= static_cast<double>(nmodes);
  rep.tail_weight = model::tail_weight(h, gs.psi);
  if (rep.tail_weight > 0.0) {
    rep.ratio_to_tail = rep.max / std::sqrt(rep.tail_weight);
  } else {
    rep.ratio_to_tail = rep.max == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return rep;
}

JDecomposition j_decomposition(const GroundState& gs, const NelsonMatrix& h, const PlaneWaveSet& waves,
                               const Eigen::MatrixXd& x2, double kappa, double lambda,
                               const SolverTolerances& tol, bool keep_vectors) {
  check_inputs(gs, h, waves);
  if (static_cast<std::size_t>(x2.rows()) != h.levels() || x2.rows() != x2.cols()) {
    throw Error("x^2 matrix does not match the atomic levels");
  }
  const std::size_t nmodes = h.modes->size();
  const double q = h.q;

  JDecomposition d;
  const Eigen::MatrixXcd x2c = x2.cast<std::complex<double>>();
  d.x2 = spectral::expectation(gs.psi, [&](const StateVector& v) { return model::apply_atomic(h, x2c, v); });

  const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(
      static_cast<Eigen::Index>(h.levels()), static_cast<Eigen::Index>(h.levels()));
  double k2_moment = 0.0;
  for (std::size_t j = 0; j < nmodes; ++j) {
    const field::Mode& mode = h.modes->modes[j];
    const double g = mode.coupling();
    const double k = mode.norm_k();

    const StateVector a_psi = model::apply_mode_annihilation(h, j, gs.psi);
    StateVector j1 = (-q * g / mode.omega) * gs.psi;
    StateVector j2 = StateVector::Zero(gs.psi.size());
    if (q != 0.0) {
      const StateVector dipole_error = model::apply_atomic(h, waves.matrices[j] - identity, gs.psi);
      j2 = (-q * g) * resolvent(gs, h, j, dipole_error, tol);
    }

    const double a_norm = a_psi.norm();
    const double j1_norm = j1.norm();
    const double j2_norm = j2.norm();
    const double r_norm = (a_psi - j1 - j2).norm();
    d.n_meas += a_norm * a_norm;
    d.s1 += j1_norm * j1_norm;
    d.s2 += j2_norm * j2_norm;
    d.residual_norms.push_back(r_norm);
    d.residual_sum_squares += r_norm * r_norm;
    d.s1_identity += q * q * g * g / (mode.omega * mode.omega);
    k2_moment += g * g * k * k / (mode.omega * mode.omega);
    if (keep_vectors) {
      d.j1.push_back(std::move(j1));
      d.j2.push_back(std::move(j2));
    }
  }
  const double pi2 = std::numbers::pi * std::numbers::pi;
  d.s1_continuum = q * q * std::log(lambda / kappa) / (4.0 * pi2);
  d.s2_cap_continuum = q * q * lambda * lambda * d.x2 / (8.0 * pi2);
  d.s2_cap_discrete = q * q * k2_moment * d.x2;
  return d;
}

}  // namespace nelson::ircheck
