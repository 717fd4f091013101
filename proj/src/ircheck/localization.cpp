#include <algorithm>
#include <cmath>
#include <string>

#include "nelson/errors.hpp"
#include "nelson/ircheck.hpp"

namespace nelson::ircheck {

namespace {

double atomic_expectation(const NelsonMatrix& h, const StateVector& psi, const Eigen::MatrixXd& a) {
  const Eigen::MatrixXcd ac = a.cast<std::complex<double>>();
  return spectral::expectation(psi, [&](const StateVector& v) { return model::apply_atomic(h, ac, v); });
}

}  // namespace

Moments position_moments(const NelsonMatrix& h, const StateVector& psi, const atomic::AtomicOperators& ops) {
  Moments m;
  double mean2 = 0.0;
  for (const auto& x : ops.position) {
    const double v = atomic_expectation(h, psi, x);
    m.mean.push_back(v);
    mean2 += v * v;
  }
  m.x2 = atomic_expectation(h, psi, ops.x2);
  m.abs_x = atomic_expectation(h, psi, ops.abs_x);
  m.exp_abs_x = atomic_expectation(h, psi, ops.exp_abs_x);
  // The projected x^2 dominates the squared projected mean, so this is >= 0
  // up to rounding.
  m.dx = std::sqrt(std::max(0.0, m.x2 - mean2));
  return m;
}

double sup_potential_outside(const atomic::PotentialSpec& potential, const atomic::GridSpec& grid,
                             double radius) {
  double sup = 0.0;
  for (std::size_t u = 0; u < grid.unknowns(); ++u) {
    const auto p = grid.position(u);
    const double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    if (r > radius) sup = std::max(sup, std::abs(potential.at(grid, u)));
  }
  return sup;
}

LocalizationReport localization_report(const NelsonMatrix& h, const StateVector& psi,
                                       const atomic::AtomicOperators& ops, double c0, double n0,
                                       const atomic::PotentialSpec& potential,
                                       const atomic::GridSpec& grid, double atomic_energy) {
  if (!(c0 >= 0.0) || !(n0 >= 0.0)) throw Error("localization: C0 and N0 must be >= 0");
  if (std::abs(ops.decay_rate - 2.0 * c0) > 1e-14 * std::max(1.0, c0)) {
    throw Error("localization: operators were built for a different decay rate");
  }
  LocalizationReport rep;
  rep.c0 = c0;
  rep.n0 = n0;
  rep.atomic_energy = atomic_energy;
  rep.sup_outside = sup_potential_outside(potential, grid, n0);
  rep.margin = std::abs(atomic_energy) - rep.sup_outside - c0 * c0;
  if (!(atomic_energy < 0.0) || !(rep.margin > 0.0)) {
    throw InfeasibleError("localization infeasible: |E_at| - sup_{|x|>N0}|V| - C0^2 = " +
                              std::to_string(rep.margin) + " (E_at " + std::to_string(atomic_energy) +
                              ", sup|V| " + std::to_string(rep.sup_outside) + ", C0^2 " +
                              std::to_string(c0 * c0) + ")",
                          rep.margin);
  }
  rep.moments = position_moments(h, psi, ops);
  const auto& m = rep.moments;
  rep.finite = std::isfinite(m.x2) && std::isfinite(m.abs_x) && std::isfinite(m.dx) && std::isfinite(m.exp_abs_x);
  return rep;
}

}  // namespace nelson::ircheck
