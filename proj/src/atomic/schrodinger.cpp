#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "nelson/atomic.hpp"
#include "nelson/errors.hpp"
#include "nelson/lanczos.hpp"

namespace nelson::atomic {

SparseRealMatrix assemble_schrodinger(const PotentialSpec& potential, const GridSpec& grid) {
  grid.validate();
  potential.validate();

  const std::size_t m = grid.interior_per_axis();
  const std::size_t n = grid.unknowns();
  const double h = grid.spacing();
  const double kinetic_diag = grid.dim / (h * h);
  const double hop = -0.5 / (h * h);

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(n * (1 + 2 * grid.dim));
  std::array<std::size_t, 3> stride{1, m, m * m};

  for (std::size_t u = 0; u < n; ++u) {
    const double v = potential.at(grid, u);
    if (!std::isfinite(v)) {
      throw InvalidPotentialError("non-finite potential at node " +
                                  std::to_string(grid.lattice_index(u)));
    }
    entries.emplace_back(u, u, kinetic_diag + v);
    for (int axis = 0; axis < grid.dim; ++axis) {
      const std::size_t s = stride[axis];
      const std::size_t i = (u / s) % m;
      if (i > 0) entries.emplace_back(u, u - s, hop);
      if (i + 1 < m) entries.emplace_back(u, u + s, hop);
    }
  }
  SparseRealMatrix op(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  op.setFromTriplets(entries.begin(), entries.end());
  op.makeCompressed();
  return op;
}

namespace {

// Reproducible on every platform: built from raw engine bits instead of a
// distribution object, whose output is implementation-defined.
Eigen::VectorXd deterministic_start(std::size_t n, std::uint64_t stream) {
  std::mt19937_64 engine(0x5eed5eedULL + stream);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = static_cast<double>(engine() >> 11) * 0x1.0p-53 - 0.5;
  return v / v.norm();
}

bool same_level(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

AtomicBasis solve_atomic(const SparseRealMatrix& hamiltonian, const GridSpec& grid,
                         std::size_t levels, const AtomicSolveOptions& opt,
                         std::uint64_t provenance) {
  if (levels < 1) throw Error("solve_atomic: need at least one level");
  const auto n = static_cast<std::size_t>(hamiltonian.rows());
  if (n != grid.unknowns()) throw InvalidGridError("operator size does not match the grid");
  if (levels >= n) throw Error("solve_atomic: more levels requested than grid unknowns");

  spectral::LanczosOptions lanczos;
  lanczos.tol = opt.tol;
  lanczos.max_iter = opt.max_iter;
  lanczos.krylov_dim = opt.krylov_dim;
  lanczos.keep = opt.krylov_dim / 3;

  auto apply = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    out.noalias() = hamiltonian * in;
  };

  std::vector<Eigen::VectorXd> locked;
  std::vector<double> values;
  std::size_t iterations = 0;
  auto next_pair = [&] {
    // A fresh start per level: the previous one has no weight left on the
    // unlocked members of a degenerate multiplet.
    const Eigen::VectorXd start = deterministic_start(n, locked.size());
    auto pair = spectral::lowest_eigenpair<double>(
        apply, start, std::span<const Eigen::VectorXd>(locked), lanczos);
    iterations += pair.iterations;
    values.push_back(pair.value);
    locked.push_back(std::move(pair.vector));
  };

  for (std::size_t a = 0; a < levels; ++a) next_pair();
  // Keep whole multiplets: extend while the next level sits on the last one.
  while (locked.size() + 1 < n) {
    const double top = *std::max_element(values.begin(), values.end());
    next_pair();
    if (!same_level(values.back(), top, opt.degeneracy_tol)) {
      values.pop_back();
      locked.pop_back();
      break;
    }
  }

  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  AtomicBasis basis;
  basis.grid = grid;
  basis.iterations = iterations;
  basis.hash = provenance;
  basis.orbitals.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(order.size()));
  const double scale = 1.0 / std::sqrt(grid.cell_volume());
  Eigen::VectorXd hu(static_cast<Eigen::Index>(n));
  for (std::size_t c = 0; c < order.size(); ++c) {
    Eigen::VectorXd u = locked[order[c]];
    u.normalize();
    Eigen::Index peak = 0;
    u.cwiseAbs().maxCoeff(&peak);
    if (u(peak) < 0.0) u = -u;
    hu.noalias() = hamiltonian * u;
    const double e = u.dot(hu);
    basis.energies.push_back(e);
    basis.residuals.push_back((hu - e * u).norm());
    basis.orbitals.col(static_cast<Eigen::Index>(c)) = scale * u;
  }
  return basis;
}

AtomicBasis solve_atomic(const PotentialSpec& potential, const GridSpec& grid, std::size_t levels,
                         const AtomicSolveOptions& opt) {
  ContentHash h;
  potential.hash_into(h);
  grid.hash_into(h);
  h.add(static_cast<std::uint64_t>(levels)).add(opt.tol);
  return solve_atomic(assemble_schrodinger(potential, grid), grid, levels, opt, h.value());
}

Eigen::MatrixXd AtomicBasis::gram() const {
  return grid.cell_volume() * (orbitals.transpose() * orbitals);
}

}  // namespace nelson::atomic
