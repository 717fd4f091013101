#include <cmath>

#include "nelson/errors.hpp"
#include "nelson/hash.hpp"
#include "nelson/model.hpp"

namespace nelson::model {

std::uint64_t frozen_basis_hash(double frozen_energy) {
  ContentHash h;
  h.add("frozen-particle").add(frozen_energy);
  return h.value();
}

PlaneWaveSet frozen_plane_waves(const field::ModeSet& modes, std::uint64_t frozen_hash) {
  PlaneWaveSet set;
  set.basis_hash = frozen_hash;
  set.modes_hash = modes.hash;
  set.frozen = true;
  set.matrices.assign(modes.size(), Eigen::MatrixXcd::Identity(1, 1));
  return set;
}

NelsonMatrix assemble_van_hove(std::shared_ptr<const field::ModeSet> modes,
                               std::shared_ptr<const field::FockSpace> fock, double frozen_energy,
                               double q) {
  if (!modes) throw Error("assemble_van_hove: missing mode set");
  const std::uint64_t hash = frozen_basis_hash(frozen_energy);
  const PlaneWaveSet waves = frozen_plane_waves(*modes, hash);
  return assemble_from_levels(q, {frozen_energy}, hash, std::move(modes), std::move(fock), waves);
}

VanHoveSolution van_hove_closed_form(const field::ModeSet& modes, double frozen_energy, double q) {
  VanHoveSolution sol;
  sol.energy = frozen_energy;
  for (const auto& m : modes.modes) {
    const double g = m.coupling();
    const double alpha = -q * g / m.omega;
    sol.energy -= q * q * g * g / m.omega;
    sol.number += alpha * alpha;
    sol.displacements.push_back(alpha);
  }
  return sol;
}

EnergyBracket self_energy_bracket(const field::ModeSet& modes, double atomic_energy, double q) {
  return {atomic_energy - q * q * modes.coupling_moment(0), atomic_energy};
}

EnergyBracket completed_square_bracket(const field::ModeSet& modes, double atomic_energy, double q) {
  return {atomic_energy - q * q * modes.coupling_moment(1), atomic_energy};
}

}  // namespace nelson::model
