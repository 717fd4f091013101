#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "nelson/errors.hpp"
#include "nelson/model.hpp"
#include "oracles.hpp"

using namespace nelson;
using namespace nelson::model;

namespace {

using Dense = Eigen::MatrixXcd;

Dense kron(const Dense& a, const Dense& b) {
  Dense out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Annihilation matrix of mode j built from the occupation tuples.
Dense dense_annihilation(const field::FockSpace& fs, std::size_t j) {
  const auto n = static_cast<Eigen::Index>(fs.dim());
  Dense a = Dense::Zero(n, n);
  for (std::size_t c = 0; c < fs.dim(); ++c) {
    const auto cfg = fs.config(c);
    std::vector<int> lower(cfg.begin(), cfg.end());
    if (lower[j] == 0) continue;
    lower[j] -= 1;
    a(fs.index_of(lower), static_cast<Eigen::Index>(c)) = std::sqrt(static_cast<double>(cfg[j]));
  }
  return a;
}

struct Small {
  atomic::AtomicBasis basis;
  std::shared_ptr<const field::ModeSet> modes;
  std::shared_ptr<const field::FockSpace> fock;
  PlaneWaveSet waves;
};

Small small_coupled(std::size_t levels, int shells, int directions, int total_max, double kappa = 0.2) {
  atomic::GridSpec g;
  g.dim = 1;
  g.half_extent = 8.0;
  g.points = 81;
  Small s;
  s.basis = atomic::solve_atomic(atomic::PotentialSpec::harmonic(1.0), g, levels);
  field::ModeParams p;
  p.kappa = kappa;
  p.lambda = 1.0;
  p.shells = shells;
  p.directions = directions;
  s.modes = std::make_shared<const field::ModeSet>(field::build_modes(p));
  s.fock = std::make_shared<const field::FockSpace>(s.modes->size(), total_max, total_max);
  s.waves = build_plane_waves(s.basis, *s.modes);
  return s;
}

std::shared_ptr<const field::ModeSet> single_mode(double omega, double g) {
  field::Mode m;
  m.k = {0.0, 0.0, omega};
  m.omega = omega;
  m.weight = 1.0;
  m.amp = g;
  return std::make_shared<const field::ModeSet>(field::ModeSet::from_modes({m}));
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("assembled matrix equals the dense tensor-product formula") {
  const Small s = small_coupled(2, 2, 1, 3);
  const double q = 0.7;
  const NelsonMatrix h = assemble_hamiltonian(q, s.basis, s.modes, s.fock, s.waves);
  const auto m = static_cast<Eigen::Index>(s.basis.size());
  const auto f = static_cast<Eigen::Index>(s.fock->dim());

  Dense atomic_part = Dense::Zero(m, m);
  for (Eigen::Index a = 0; a < m; ++a) atomic_part(a, a) = s.basis.energies[a];
  Dense field_part = Dense::Zero(f, f);
  for (Eigen::Index c = 0; c < f; ++c) {
    double e = 0.0;
    for (std::size_t j = 0; j < s.modes->size(); ++j) e += s.fock->occupation(c, j) * s.modes->modes[j].omega;
    field_part(c, c) = e;
  }
  Dense expected = kron(atomic_part, Dense::Identity(f, f)) + kron(Dense::Identity(m, m), field_part);
  for (std::size_t j = 0; j < s.modes->size(); ++j) {
    const auto& mode = s.modes->modes[j];
    const Dense w = atomic::plane_wave_matrix(s.basis, mode.k);
    const Dense aj = dense_annihilation(*s.fock, j);
    const double g = mode.amp * std::sqrt(mode.weight);
    expected += q * g * (kron(w.adjoint(), aj) + kron(w, aj.adjoint()));
  }
  const Dense assembled = Dense(h.matrix);
  CHECK((assembled - expected).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("hermiticity and a real boson-diagonal part") {
  const Small s = small_coupled(3, 3, 6, 3);
  const NelsonMatrix h = assemble_hamiltonian(-1.3, s.basis, s.modes, s.fock, s.waves);
  const Dense d = Dense(h.matrix);
  CHECK((d - d.adjoint()).cwiseAbs().maxCoeff() <= 1e-13);
  const auto f = static_cast<Eigen::Index>(s.fock->dim());
  for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(s.basis.size()); ++a)
    for (Eigen::Index c = 0; c < f; ++c) CHECK(d(a * f + c, a * f + c).imag() == 0.0);
}

TEST_CASE("zero coupling decouples") {
  const Small s = small_coupled(3, 3, 1, 3);
  const NelsonMatrix h = assemble_hamiltonian(0.0, s.basis, s.modes, s.fock, s.waves);
  const GroundState gs = solve_ground(h, {});
  CHECK(std::abs(gs.energy - s.basis.energies[0]) <= 1e-10);
  CHECK(std::abs(std::abs(gs.psi(0)) - 1.0) <= 1e-10);
  CHECK(gs.tail_weight <= 1e-20);
}

TEST_CASE("ground energy never rises above the atomic energy and is even in q") {
  const Small s = small_coupled(3, 3, 1, 4);
  const double e0 = s.basis.energies[0];
  double previous = e0;
  for (double q : {0.3, 0.6, 1.2}) {
    const double e = solve_ground(assemble_hamiltonian(q, s.basis, s.modes, s.fock, s.waves), {}).energy;
    const double e_neg = solve_ground(assemble_hamiltonian(-q, s.basis, s.modes, s.fock, s.waves), {}).energy;
    CHECK(e <= e0 + 1e-12);
    CHECK(e <= previous + 1e-12);
    CHECK(std::abs(e - e_neg) <= 1e-10);
    previous = e;
  }
}

TEST_CASE("provenance mismatches are rejected") {
  const Small s = small_coupled(2, 2, 1, 2);
  const Small other = small_coupled(2, 3, 1, 2);
  CHECK_THROWS_AS(assemble_hamiltonian(0.5, s.basis, s.modes, s.fock, other.waves), ProvenanceError);
  const Small shifted = small_coupled(2, 2, 1, 2, 0.3);
  CHECK_THROWS_AS(assemble_hamiltonian(0.5, s.basis, shifted.modes, s.fock, s.waves), ProvenanceError);
}

TEST_CASE("van Hove single mode against the displaced oscillator") {
  const auto modes = single_mode(1.0, 0.1);
  const VanHoveSolution exact = van_hove_closed_form(*modes, 0.3, 1.0);
  CHECK(exact.energy == doctest::Approx(0.3 - 0.01).epsilon(1e-15));
  CHECK(exact.number == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(exact.displacements[0] == doctest::Approx(-0.1));

  auto fock8 = std::make_shared<const field::FockSpace>(1, 8, 8);
  const GroundState gs8 = solve_ground(assemble_van_hove(modes, fock8, 0.3, 1.0), {});
  CHECK(std::abs(gs8.energy - exact.energy) <= 1e-10);

  double previous_tail = 1.0;
  for (int n = 4; n <= 10; ++n) {
    auto fock = std::make_shared<const field::FockSpace>(1, n, n);
    const NelsonMatrix h = assemble_van_hove(modes, fock, 0.3, 1.0);
    const GroundState gs = solve_ground(h, {});
    const double number = spectral::expectation(gs.psi, [&](const StateVector& v) { return apply_number(h, v); });
    const double allowed = 10.0 * gs.tail_weight + 1e-12;
    CHECK(std::abs(gs.energy - exact.energy) <= allowed);
    CHECK(std::abs(number - exact.number) <= allowed);
    CHECK(gs.tail_weight <= previous_tail);
    previous_tail = gs.tail_weight;
  }
}

TEST_CASE("van Hove closed form in the Nelson mode set") {
  field::ModeParams p;
  p.kappa = 0.1;
  p.lambda = 1.0;
  p.shells = 32;
  const field::ModeSet modes = field::build_modes(p);
  const VanHoveSolution zero = van_hove_closed_form(modes, -1.0, 0.0);
  CHECK(zero.energy == -1.0);
  CHECK(zero.number == 0.0);
  const VanHoveSolution one = van_hove_closed_form(modes, 0.0, 1.0);
  const double reference = std::log(10.0) / (4.0 * std::numbers::pi * std::numbers::pi);
  CHECK(std::abs(one.number - reference) <= 0.02 * reference);
}

TEST_CASE("self-energy brackets") {
  field::ModeParams p;
  p.kappa = 0.1;
  p.lambda = 1.0;
  p.shells = 32;
  const field::ModeSet modes = field::build_modes(p);
  const EnergyBracket zero = self_energy_bracket(modes, 0.4, 0.0);
  CHECK(zero.lower == 0.4);
  CHECK(zero.upper == 0.4);
  const EnergyBracket b = self_energy_bracket(modes, 0.0, 1.0);
  const double width = 0.99 / (8.0 * std::numbers::pi * std::numbers::pi);
  CHECK(std::abs((b.upper - b.lower) - width) <= 0.02 * width);

  // The completed-square floor is attained by the frozen particle.
  const EnergyBracket floor = completed_square_bracket(modes, 0.0, 1.0);
  CHECK(std::abs(floor.lower - van_hove_closed_form(modes, 0.0, 1.0).energy) <= 1e-15);
}

TEST_CASE("coupled ground energies respect the completed-square floor") {
  const Small s = small_coupled(3, 4, 1, 4);
  for (double q : {0.5, 1.5}) {
    const GroundState gs = solve_ground(assemble_hamiltonian(q, s.basis, s.modes, s.fock, s.waves), {});
    const EnergyBracket floor = completed_square_bracket(*s.modes, s.basis.energies[0], q);
    CHECK(gs.energy >= floor.lower - 1e-8 - gs.eig_residual);
    CHECK(gs.energy <= floor.upper + 1e-8 + gs.eig_residual);
  }
}

TEST_CASE("coordinate export lists every stored entry") {
  const Small s = small_coupled(2, 2, 1, 2);
  const NelsonMatrix h = assemble_hamiltonian(0.5, s.basis, s.modes, s.fock, s.waves);
  std::ostringstream out;
  export_coordinate(h, out);
  std::istringstream in(out.str());
  long long r, c;
  double re, im;
  Dense rebuilt = Dense::Zero(h.dim(), h.dim());
  Eigen::Index lines = 0;
  while (in >> r >> c >> re >> im) {
    rebuilt(r, c) = {re, im};
    ++lines;
  }
  CHECK(lines == h.matrix.nonZeros());
  CHECK((rebuilt - Dense(h.matrix)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coupled-space helpers") {
  const Small s = small_coupled(2, 3, 1, 3);
  const NelsonMatrix h = assemble_hamiltonian(0.5, s.basis, s.modes, s.fock, s.waves);
  std::mt19937_64 rng(13);
  StateVector psi = oracle::random_state(static_cast<Eigen::Index>(h.dim()), rng);
  psi.normalize();
  const auto f = static_cast<Eigen::Index>(s.fock->dim());
  double tail = 0.0;
  for (Eigen::Index a = 0; a < 2; ++a)
    for (Eigen::Index c = 0; c < f; ++c)
      if (s.fock->total(c) == 3) tail += std::norm(psi(a * f + c));
  CHECK(std::abs(tail_weight(h, psi) - tail) <= 1e-15);

  const Dense a1 = dense_annihilation(*s.fock, 1);
  const StateVector expected = kron(Dense::Identity(2, 2), a1) * psi;
  CHECK((apply_mode_annihilation(h, 1, psi) - expected).norm() <= 1e-14);

  Dense x(2, 2);
  x << 1.0, 2.0, 2.0, -1.0;
  CHECK((apply_atomic(h, x, psi) - kron(x, Dense::Identity(f, f)) * psi).norm() <= 1e-13);
}

}  // TEST_SUITE
