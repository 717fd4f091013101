#include <cmath>
#include <complex>
#include <limits>

#include "nelson/atomic.hpp"
#include "nelson/errors.hpp"

namespace nelson::atomic {

namespace {

// cell_volume * Phi^T diag(weights) Phi, made exactly symmetric.
Eigen::MatrixXd weighted_gram(const AtomicBasis& basis, const Eigen::VectorXd& weights) {
  Eigen::MatrixXd m =
      basis.grid.cell_volume() * (basis.orbitals.transpose() * weights.asDiagonal() * basis.orbitals);
  return 0.5 * (m + m.transpose());
}

}  // namespace

Eigen::MatrixXcd plane_wave_matrix(const AtomicBasis& basis, const Position& k) {
  const auto levels = static_cast<Eigen::Index>(basis.size());
  if (k[0] == 0.0 && k[1] == 0.0 && k[2] == 0.0) {
    return Eigen::MatrixXcd::Identity(levels, levels);
  }
  const GridSpec& grid = basis.grid;
  const auto n = static_cast<Eigen::Index>(grid.unknowns());
  Eigen::VectorXd c(n), s(n);
  for (Eigen::Index u = 0; u < n; ++u) {
    const Position x = grid.position(static_cast<std::size_t>(u));
    const double phase = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
    c(u) = std::cos(phase);
    s(u) = std::sin(phase);
  }
  const Eigen::MatrixXd re = weighted_gram(basis, c);
  const Eigen::MatrixXd im = weighted_gram(basis, s);
  Eigen::MatrixXcd w(levels, levels);
  w.real() = re;
  w.imag() = -im;
  return w;
}

AtomicOperators position_moment_matrices(const AtomicBasis& basis, double decay_rate) {
  if (!(decay_rate >= 0.0) || !std::isfinite(decay_rate)) {
    throw Error("decay rate must be finite and >= 0");
  }
  const GridSpec& grid = basis.grid;
  const auto n = static_cast<Eigen::Index>(grid.unknowns());

  double r_max = 0.0;
  std::array<Eigen::VectorXd, 3> coords{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  Eigen::VectorXd r2(n), r(n);
  for (Eigen::Index u = 0; u < n; ++u) {
    const Position x = grid.position(static_cast<std::size_t>(u));
    for (int i = 0; i < 3; ++i) coords[i](u) = x[i];
    r2(u) = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    r(u) = std::sqrt(r2(u));
    r_max = std::max(r_max, r(u));
  }
  // Keep exp(c r) and its square-sized products far from overflow.
  if (decay_rate * r_max > 0.25 * std::log(std::numeric_limits<double>::max())) {
    throw OverflowError("exp(" + std::to_string(decay_rate) + " |x|) overflows at |x|=" +
                        std::to_string(r_max) + "; use a smaller decay rate or box");
  }

  AtomicOperators ops;
  ops.decay_rate = decay_rate;
  if (grid.dim == 1) {
    ops.position.push_back(weighted_gram(basis, coords[2]));
  } else {
    for (int i = 0; i < 3; ++i) ops.position.push_back(weighted_gram(basis, coords[i]));
  }
  ops.x2 = weighted_gram(basis, r2);
  ops.abs_x = weighted_gram(basis, r);
  if (decay_rate == 0.0) {
    ops.exp_abs_x = basis.gram();
  } else {
    ops.exp_abs_x = weighted_gram(basis, (decay_rate * r).array().exp().matrix());
  }
  return ops;
}

}  // namespace nelson::atomic
