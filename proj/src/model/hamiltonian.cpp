#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>

#include "nelson/errors.hpp"
#include "nelson/model.hpp"

namespace nelson::model {

spectral::LanczosOptions SolverTolerances::lanczos() const {
  spectral::LanczosOptions opt;
  opt.tol = eig_tol;
  opt.max_iter = eig_max_iter;
  opt.krylov_dim = krylov_dim;
  opt.keep = std::max<std::size_t>(1, krylov_dim / 3);
  return opt;
}

spectral::ShiftedSolveOptions SolverTolerances::shifted(double min_shift) const {
  return {shift_tol, shift_max_iter, min_shift};
}

void ModelConfig::validate() const {
  if (!std::isfinite(q)) throw Error("coupling q must be finite");
  if (kind == ModelKind::coupled) {
    grid.validate();
    potential.validate();
    if (levels < 1) throw Error("need at least one atomic level");
  } else if (!std::isfinite(frozen_energy)) {
    throw Error("frozen energy must be finite");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw CutoffOrderError("Lambda must be positive");
  if (shells_per_decade < 1 && shells < 1) throw Error("need shells_per_decade >= 1 or shells >= 1");
  field::direction_set(directions);
  if (total_max < 1) throw Error("total-number cap must be >= 1");
  if (n_max < 0) throw Error("per-mode cap must be >= 0");
  if (generalized && !(mu >= 0.0)) throw Error("mu must be >= 0");
}

int ModelConfig::shells_for(double kappa) const {
  if (shells > 0) return shells;
  const double decades = std::log10(lambda / kappa);
  return std::max(1, static_cast<int>(std::ceil(shells_per_decade * decades - 1e-9)));
}

field::ModeParams ModelConfig::mode_params(double kappa) const {
  field::ModeParams p;
  p.kappa = kappa;
  p.lambda = lambda;
  p.shells = shells_for(kappa);
  p.directions = directions;
  p.spacing = spacing;
  p.generalized = generalized;
  p.mu = generalized ? mu : 1.0;
  p.nu = generalized ? nu : 0.5;
  return p;
}

PlaneWaveSet build_plane_waves(const atomic::AtomicBasis& basis, const field::ModeSet& modes) {
  PlaneWaveSet set;
  set.basis_hash = basis.hash;
  set.modes_hash = modes.hash;
  set.matrices.reserve(modes.size());
  for (const auto& m : modes.modes) set.matrices.push_back(atomic::plane_wave_matrix(basis, m.k));
  return set;
}

NelsonMatrix assemble_hamiltonian(double q, const atomic::AtomicBasis& basis,
                                  std::shared_ptr<const field::ModeSet> modes,
                                  std::shared_ptr<const field::FockSpace> fock,
                                  const PlaneWaveSet& waves) {
  if (waves.basis_hash != basis.hash) {
    throw ProvenanceError("plane waves were built from a different atomic basis");
  }
  return assemble_from_levels(q, basis.energies, basis.hash, std::move(modes), std::move(fock), waves);
}

NelsonMatrix assemble_from_levels(double q, std::vector<double> energies, std::uint64_t basis_hash,
                                  std::shared_ptr<const field::ModeSet> modes,
                                  std::shared_ptr<const field::FockSpace> fock,
                                  const PlaneWaveSet& waves) {
  if (!modes || !fock) throw Error("assemble: missing mode set or Fock space");
  if (waves.basis_hash != basis_hash || waves.modes_hash != modes->hash) {
    throw ProvenanceError("plane waves do not belong to this basis/mode set");
  }
  if (waves.matrices.size() != modes->size() || fock->modes() != modes->size()) {
    throw ProvenanceError("mode count differs between modes, plane waves and Fock space");
  }
  const std::size_t levels = energies.size();
  if (levels == 0 || waves.levels() != levels) {
    throw ProvenanceError("plane-wave matrices do not match the number of atomic levels");
  }
  const std::size_t fdim = fock->dim();
  const std::size_t dim = levels * fdim;
  if (dim > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
    throw CapacityError("coupled dimension exceeds the sparse index range", dim);
  }

  const std::size_t nmodes = modes->size();
  std::vector<double> g(nmodes), omega(nmodes);
  for (std::size_t j = 0; j < nmodes; ++j) {
    g[j] = q * modes->modes[j].coupling();
    omega[j] = modes->modes[j].omega;
  }
  std::vector<double> boson_energy(fdim, 0.0);
  for (std::size_t f = 0; f < fdim; ++f) {
    for (std::size_t j = 0; j < nmodes; ++j) boson_energy[f] += fock->occupation(f, j) * omega[j];
  }

  using Entry = std::pair<int, std::complex<double>>;
  std::vector<Entry> row;
  std::size_t nnz_estimate = dim * (1 + (q != 0.0 ? 2 * nmodes * levels : 0));
  NelsonMatrix out;
  out.matrix.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  out.matrix.reserve(static_cast<Eigen::Index>(nnz_estimate));

  for (std::size_t a = 0; a < levels; ++a) {
    for (std::size_t f = 0; f < fdim; ++f) {
      row.clear();
      row.emplace_back(static_cast<int>(a * fdim + f), energies[a] + boson_energy[f]);
      if (q != 0.0) {
        for (std::size_t j = 0; j < nmodes; ++j) {
          const Eigen::MatrixXcd& w = waves.matrices[j];
          const int n = fock->occupation(f, j);
          // W x a^dagger: (b, f - e_j) -> (a, f)
          if (const auto lower = fock->lowered(f, j); lower >= 0) {
            const double amp = g[j] * std::sqrt(static_cast<double>(n));
            for (std::size_t b = 0; b < levels; ++b) {
              const std::complex<double> v = amp * w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
              if (v != 0.0) row.emplace_back(static_cast<int>(b * fdim + static_cast<std::size_t>(lower)), v);
            }
          }
          // W^dagger x a: (b, f + e_j) -> (a, f)
          if (const auto upper = fock->raised(f, j); upper >= 0) {
            const double amp = g[j] * std::sqrt(n + 1.0);
            for (std::size_t b = 0; b < levels; ++b) {
              const std::complex<double> v =
                  amp * std::conj(w(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)));
              if (v != 0.0) row.emplace_back(static_cast<int>(b * fdim + static_cast<std::size_t>(upper)), v);
            }
          }
        }
      }
      std::sort(row.begin(), row.end(), [](const Entry& x, const Entry& y) { return x.first < y.first; });
      const auto r = static_cast<Eigen::Index>(a * fdim + f);
      out.matrix.startVec(r);
      for (const auto& [col, v] : row) out.matrix.insertBack(r, col) = v;
    }
  }
  out.matrix.finalize();
  out.matrix.makeCompressed();

  out.q = q;
  out.energies = std::move(energies);
  out.basis_hash = basis_hash;
  out.modes_hash = modes->hash;
  out.fock_hash = fock->hash();
  out.modes = std::move(modes);
  out.fock = std::move(fock);
  return out;
}

void export_coordinate(const NelsonMatrix& h, std::ostream& out) {
  char line[160];
  for (Eigen::Index r = 0; r < h.matrix.outerSize(); ++r) {
    for (SparseComplexMatrix::InnerIterator it(h.matrix, r); it; ++it) {
      std::snprintf(line, sizeof line, "%lld %lld %.17g %.17g\n", static_cast<long long>(it.row()),
                    static_cast<long long>(it.col()), it.value().real(), it.value().imag());
      out << line;
    }
  }
}

// ---------------------------------------------------------------- helpers

namespace {

void check_state(const NelsonMatrix& h, const StateVector& psi) {
  if (static_cast<std::size_t>(psi.size()) != h.dim()) throw Error("state size does not match the model");
}

}  // namespace

StateVector apply_mode_annihilation(const NelsonMatrix& h, std::size_t j, const StateVector& psi) {
  check_state(h, psi);
  const field::FockSpace& fs = *h.fock;
  const std::size_t fdim = fs.dim();
  StateVector out = StateVector::Zero(psi.size());
  for (std::size_t f = 0; f < fdim; ++f) {
    const auto src = fs.raised(f, j);
    if (src < 0) continue;
    const double amp = std::sqrt(fs.occupation(f, j) + 1.0);
    for (std::size_t a = 0; a < h.levels(); ++a) {
      out(static_cast<Eigen::Index>(a * fdim + f)) = amp * psi(static_cast<Eigen::Index>(a * fdim + static_cast<std::size_t>(src)));
    }
  }
  return out;
}

StateVector apply_number(const NelsonMatrix& h, const StateVector& psi) {
  check_state(h, psi);
  const field::FockSpace& fs = *h.fock;
  const std::size_t fdim = fs.dim();
  StateVector out(psi.size());
  for (std::size_t a = 0; a < h.levels(); ++a) {
    for (std::size_t f = 0; f < fdim; ++f) {
      const auto i = static_cast<Eigen::Index>(a * fdim + f);
      out(i) = static_cast<double>(fs.total(f)) * psi(i);
    }
  }
  return out;
}

StateVector apply_atomic(const NelsonMatrix& h, const Eigen::MatrixXcd& a, const StateVector& psi) {
  check_state(h, psi);
  const auto levels = static_cast<Eigen::Index>(h.levels());
  if (a.rows() != levels || a.cols() != levels) throw Error("atomic operator has the wrong size");
  const auto fdim = static_cast<Eigen::Index>(h.fock->dim());
  // Column b of the map is the Fock amplitude of atomic level b.
  Eigen::Map<const Eigen::MatrixXcd> in(psi.data(), fdim, levels);
  StateVector out(psi.size());
  Eigen::Map<Eigen::MatrixXcd> res(out.data(), fdim, levels);
  res.noalias() = in * a.transpose();
  return out;
}

double tail_weight(const NelsonMatrix& h, const StateVector& psi) {
  check_state(h, psi);
  const field::FockSpace& fs = *h.fock;
  const std::size_t fdim = fs.dim();
  double sum = 0.0;
  for (std::size_t f = 0; f < fdim; ++f) {
    if (fs.total(f) != fs.total_max()) continue;
    for (std::size_t a = 0; a < h.levels(); ++a) sum += std::norm(psi(static_cast<Eigen::Index>(a * fdim + f)));
  }
  return sum;
}

namespace {

// A diagonal matrix (q = 0) has its lowest basis vector as an exact ground
// state, so no iterative noise enters the photon sector.
std::optional<GroundState> diagonal_ground(const SparseComplexMatrix& m) {
  for (int c = 0; c < m.outerSize(); ++c)
    for (SparseComplexMatrix::InnerIterator it(m, c); it; ++it)
      if (it.row() != it.col() && it.value() != 0.0) return std::nullopt;
  const Eigen::VectorXd diag = m.diagonal().real();
  Eigen::Index best = 0;
  diag.minCoeff(&best);
  GroundState gs;
  gs.energy = diag(best);
  gs.psi = StateVector::Zero(m.rows());
  gs.psi(best) = 1.0;
  Eigen::VectorXd rest = diag;
  rest(best) = std::numeric_limits<double>::infinity();
  gs.gap_estimate = rest.size() > 1 ? rest.minCoeff() - gs.energy : 0.0;
  return gs;
}

}  // namespace

GroundState solve_ground(const NelsonMatrix& h, const SolverTolerances& tol) {
  const auto exact = diagonal_ground(h.matrix);
  GroundState gs = exact ? *exact : spectral::lanczos_ground(h.matrix, tol.lanczos());
  gs.tail_weight = tail_weight(h, gs.psi);
  return gs;
}

}  // namespace nelson::model
