#pragma once

// Particle sector: potentials, the grid Schroedinger operator, its lowest
// eigenstates and matrix elements of position functions and plane waves in
// that truncated eigenbasis.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nelson/hash.hpp"

namespace nelson::atomic {

using SparseRealMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Position = std::array<double, 3>;

enum class PotentialClass { c1, c2, unclassified };

std::string to_string(PotentialClass cls);

// Uniform grid on [-L, L]^d with `points` nodes per axis (odd, so the origin
// is a node). The outermost nodes carry the Dirichlet zeros, so unknowns live
// on the (points - 2)^d interior nodes.
struct GridSpec {
  int dim = 3;
  double half_extent = 8.0;
  int points = 41;

  void validate() const;
  double spacing() const { return 2.0 * half_extent / (points - 1); }
  double cell_volume() const;
  std::size_t interior_per_axis() const { return static_cast<std::size_t>(points - 2); }
  std::size_t unknowns() const;
  std::size_t total_nodes() const;

  // Physical position of interior unknown u. A one-dimensional particle moves
  // along the z axis.
  Position position(std::size_t u) const;
  // Index of interior unknown u in the full points^d lattice (axis 0 fastest).
  std::size_t lattice_index(std::size_t u) const;

  void hash_into(ContentHash& h) const;
  bool operator==(const GridSpec&) const = default;
};

struct Harmonic {
  double omega0 = 1.0;
  bool operator==(const Harmonic&) const = default;
};
// V(x) = -depth * exp(-|x|^2 / (2 width^2))
struct GaussianWell {
  double depth = 5.0;
  double width = 1.0;
  bool operator==(const GaussianWell&) const = default;
};
// Values on the full points^d lattice; boundary entries are ignored.
struct Tabulated {
  std::vector<double> values;
  bool operator==(const Tabulated&) const = default;
};
struct Free {
  bool operator==(const Free&) const = default;
};

struct PotentialSpec {
  std::variant<Harmonic, GaussianWell, Tabulated, Free> kind = Harmonic{};
  PotentialClass declared_class = PotentialClass::c1;
  // |x|^2 <= c1 V(x) + c2; required for tabulated C1 potentials.
  std::optional<std::pair<double, double>> c1_constants_override;

  static PotentialSpec harmonic(double omega0);
  static PotentialSpec gaussian_well(double depth, double width);
  static PotentialSpec tabulated(std::vector<double> values, PotentialClass cls,
                                 std::optional<std::pair<double, double>> c12 = std::nullopt);
  static PotentialSpec free();

  void validate() const;
  std::string name() const;
  double at(const GridSpec& grid, std::size_t u) const;
  // (c1, c2) for class C1 potentials; throws for anything else.
  std::pair<double, double> c1_constants() const;
  void hash_into(ContentHash& h) const;
  bool operator==(const PotentialSpec&) const = default;
};

// Reads "node_index value" lines (full-lattice indices, '#' comments allowed).
PotentialSpec read_potential_table(std::istream& in, const GridSpec& grid, PotentialClass cls,
                                   std::optional<std::pair<double, double>> c12 = std::nullopt);

// -1/2 Laplacian (central differences, Dirichlet walls) + V, on the interior
// unknowns. Throws InvalidPotentialError on a non-finite node value.
SparseRealMatrix assemble_schrodinger(const PotentialSpec& potential, const GridSpec& grid);

struct AtomicSolveOptions {
  double tol = 1e-8;
  std::size_t max_iter = 200000;
  std::size_t krylov_dim = 80;
  // Relative gap below which two levels count as one multiplet.
  double degeneracy_tol = 1e-6;
};

struct AtomicBasis {
  GridSpec grid;
  std::vector<double> energies;  // ascending
  // Column a holds orbital a on the interior nodes, normalized so that
  // cell_volume * sum |phi|^2 = 1. Largest-magnitude entry is positive.
  Eigen::MatrixXd orbitals;
  std::vector<double> residuals;  // ||H u - E u|| for the unit coefficient vector u
  std::size_t iterations = 0;
  std::uint64_t hash = 0;

  std::size_t size() const { return energies.size(); }
  double ground_energy() const { return energies.front(); }
  Eigen::MatrixXd gram() const;
};

// Lowest `levels` eigenpairs of `hamiltonian`. The count is raised until the
// last retained level is not split from the next one.
AtomicBasis solve_atomic(const SparseRealMatrix& hamiltonian, const GridSpec& grid,
                         std::size_t levels, const AtomicSolveOptions& opt = {},
                         std::uint64_t provenance = 0);
AtomicBasis solve_atomic(const PotentialSpec& potential, const GridSpec& grid,
                         std::size_t levels, const AtomicSolveOptions& opt = {});

struct ClassReport {
  PotentialClass cls = PotentialClass::unclassified;
  double c1 = 0.0;
  double c2 = 0.0;
  double ground_energy = 0.0;
  std::vector<double> decay_radii;
  std::vector<double> decay_sup;  // sup_{|x| > R} |V| per radius
  double min_ground_component = 0.0;  // after the sign fix, relative to max
  std::size_t negative_nodes = 0;
};

ClassReport validate_class(const PotentialSpec& potential, const AtomicBasis& basis);

// <phi_a, exp(-i k.x) phi_b> by node sums.
Eigen::MatrixXcd plane_wave_matrix(const AtomicBasis& basis, const Position& k);

struct AtomicOperators {
  std::vector<Eigen::MatrixXd> position;  // one per particle axis (d=1: z)
  Eigen::MatrixXd x2;
  Eigen::MatrixXd abs_x;
  Eigen::MatrixXd exp_abs_x;  // exp(decay_rate |x|)
  double decay_rate = 0.0;
};

AtomicOperators position_moment_matrices(const AtomicBasis& basis, double decay_rate);

}  // namespace nelson::atomic
