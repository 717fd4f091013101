#pragma once

// Coupled Hamiltonian on (M atomic levels) x (truncated Fock space):
//
//   H = diag(E_a) x 1 + 1 x sum_j n_j omega_j
//       + q sum_j g_j ( W(k_j)^dagger x a_j + W(k_j) x a_j^dagger ),
//
// with g_j = amp_j sqrt(w_j) and W(k) the matrix of exp(-i k.x). Coupled
// vectors are stored atomic-major: psi[a * fock.dim() + f].

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "nelson/atomic.hpp"
#include "nelson/field.hpp"
#include "nelson/spectral.hpp"

namespace nelson::model {

using spectral::GroundState;
using spectral::SparseComplexMatrix;
using spectral::StateVector;

enum class ModelKind { coupled, van_hove };

struct SolverTolerances {
  double eig_tol = 1e-10;
  std::size_t eig_max_iter = 50000;
  std::size_t krylov_dim = 60;
  double shift_tol = 1e-12;
  std::size_t shift_max_iter = 20000;
  double atomic_tol = 1e-8;

  spectral::LanczosOptions lanczos() const;
  spectral::ShiftedSolveOptions shifted(double min_shift = 0.0) const;
};

struct ModelConfig {
  ModelKind kind = ModelKind::coupled;
  double q = 0.5;

  atomic::PotentialSpec potential = atomic::PotentialSpec::harmonic(1.0);
  atomic::GridSpec grid;
  std::size_t levels = 4;
  double frozen_energy = 0.0;  // E_at of the van Hove model

  double lambda = 1.0;
  int shells_per_decade = 12;
  int shells = 0;  // > 0 fixes the shell count for every kappa
  int directions = 1;
  field::Spacing spacing = field::Spacing::log;
  bool generalized = false;
  double mu = 1.0;
  double nu = 0.5;

  int n_max = 0;  // 0: same as total_max
  int total_max = 5;
  std::size_t max_dim = 4'000'000;

  SolverTolerances tol;

  void validate() const;
  int per_mode_cap() const { return n_max > 0 ? n_max : total_max; }
  // Shell count used at this infrared cutoff.
  int shells_for(double kappa) const;
  field::ModeParams mode_params(double kappa) const;
};

// exp(-i k_j . x) in the atomic basis, one matrix per mode.
struct PlaneWaveSet {
  std::vector<Eigen::MatrixXcd> matrices;
  std::uint64_t basis_hash = 0;
  std::uint64_t modes_hash = 0;
  bool frozen = false;

  std::size_t levels() const { return matrices.empty() ? 0 : static_cast<std::size_t>(matrices.front().rows()); }
};

PlaneWaveSet build_plane_waves(const atomic::AtomicBasis& basis, const field::ModeSet& modes);
// The particle pinned at the origin: one level, W = 1 for every mode.
PlaneWaveSet frozen_plane_waves(const field::ModeSet& modes, std::uint64_t frozen_hash);

struct NelsonMatrix {
  SparseComplexMatrix matrix;
  double q = 0.0;
  std::vector<double> energies;  // atomic levels
  std::shared_ptr<const field::ModeSet> modes;
  std::shared_ptr<const field::FockSpace> fock;
  std::uint64_t basis_hash = 0;
  std::uint64_t modes_hash = 0;
  std::uint64_t fock_hash = 0;

  std::size_t levels() const { return energies.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }
};

NelsonMatrix assemble_hamiltonian(double q, const atomic::AtomicBasis& basis,
                                  std::shared_ptr<const field::ModeSet> modes,
                                  std::shared_ptr<const field::FockSpace> fock,
                                  const PlaneWaveSet& waves);

// Same assembly from bare level energies; used by the frozen-particle model.
NelsonMatrix assemble_from_levels(double q, std::vector<double> energies, std::uint64_t basis_hash,
                                  std::shared_ptr<const field::ModeSet> modes,
                                  std::shared_ptr<const field::FockSpace> fock,
                                  const PlaneWaveSet& waves);

std::uint64_t frozen_basis_hash(double frozen_energy);

NelsonMatrix assemble_van_hove(std::shared_ptr<const field::ModeSet> modes,
                               std::shared_ptr<const field::FockSpace> fock, double frozen_energy,
                               double q);

struct VanHoveSolution {
  double energy = 0.0;
  double number = 0.0;
  std::vector<double> displacements;  // alpha_j = -q g_j / omega_j
};

VanHoveSolution van_hove_closed_form(const field::ModeSet& modes, double frozen_energy, double q);

struct EnergyBracket {
  double lower = 0.0;
  double upper = 0.0;
};

// [E_at - q^2 sum_j g_j^2, E_at]
EnergyBracket self_energy_bracket(const field::ModeSet& modes, double atomic_energy, double q);

// [E_at - q^2 sum_j g_j^2 / omega_j, E_at]. The lower end follows from
// completing the square in each mode and holds for every truncation; it is
// attained by the frozen particle.
EnergyBracket completed_square_bracket(const field::ModeSet& modes, double atomic_energy, double q);

// "row col re im" lines, zero-based, one per stored entry.
void export_coordinate(const NelsonMatrix& h, std::ostream& out);

// ---------------------------------------------------------------- coupled-space helpers

// (1 x a_j) psi
StateVector apply_mode_annihilation(const NelsonMatrix& h, std::size_t j, const StateVector& psi);
// (1 x N) psi
StateVector apply_number(const NelsonMatrix& h, const StateVector& psi);
// (A x 1) psi for an M x M atomic matrix
StateVector apply_atomic(const NelsonMatrix& h, const Eigen::MatrixXcd& a, const StateVector& psi);
double tail_weight(const NelsonMatrix& h, const StateVector& psi);

// Ground state of the assembled matrix with the tail weight filled in.
GroundState solve_ground(const NelsonMatrix& h, const SolverTolerances& tol);

}  // namespace nelson::model
