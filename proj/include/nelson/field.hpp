#pragma once

// Boson sector: quadrature modes for the momentum shell kappa <= |k| <= Lambda
// and the occupation-number basis truncated by per-mode and total caps.

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace nelson::field {

using StateVector = Eigen::VectorXcd;

enum class Spacing { log, linear };

std::string to_string(Spacing s);
Spacing spacing_from_string(const std::string& s);

struct ModeParams {
  double kappa = 0.1;
  double lambda = 1.0;
  int shells = 16;
  int directions = 1;  // 1: +z, 6: +-axes, 12: icosahedron vertices
  Spacing spacing = Spacing::log;
  // Default Nelson profile: omega = |k|, amp = (2 pi)^{-3/2} / sqrt(2 |k|).
  // Generalized: omega = |k|^mu, amp = (2 pi)^{-3/2} |k|^{-nu}.
  bool generalized = false;
  double mu = 1.0;
  double nu = 0.5;
};

struct Mode {
  std::array<double, 3> k{};
  double omega = 0.0;
  double weight = 0.0;  // momentum-space volume represented by the mode
  double amp = 0.0;

  double norm_k() const;
  // g_j = amp_j sqrt(w_j): the discrete coupling entering H.
  double coupling() const;
};

struct ModeSet {
  ModeParams params;
  std::vector<Mode> modes;
  std::uint64_t hash = 0;

  std::size_t size() const { return modes.size(); }
  double total_weight() const;
  // Sum_j g_j^2 / omega_j^p for p = 0, 1, 2.
  double coupling_moment(int omega_power) const;
  double min_frequency() const;

  // Hand-built mode list, e.g. a single oscillator for closed-form checks.
  static ModeSet from_modes(std::vector<Mode> modes);
};

// Shells are split equally over `directions`; each direction sits at the
// shell's representative radius (geometric mean for log spacing, arithmetic
// for linear).
ModeSet build_modes(const ModeParams& params);

double shell_volume(double inner, double outer);
std::vector<std::array<double, 3>> direction_set(int directions);

// CSV with header kx,ky,kz,omega,weight,amp.
void write_csv(const ModeSet& modes, std::ostream& out);

// Occupation tuples with n_j <= n_max and sum n_j <= N_max, ordered by total
// number and then lexicographically descending; the vacuum has ordinal 0.
class FockSpace {
 public:
  static constexpr std::size_t kDefaultMaxDim = 20'000'000;

  FockSpace(std::size_t modes, int n_max, int total_max, std::size_t max_dim = kDefaultMaxDim);

  // Number of configurations without enumerating them. Saturates at 2^62.
  static std::uint64_t count(std::size_t modes, int n_max, int total_max);

  std::size_t modes() const { return modes_; }
  int n_max() const { return n_max_; }
  int total_max() const { return total_max_; }
  std::size_t dim() const { return totals_.size(); }

  std::span<const std::uint8_t> config(std::size_t i) const {
    return {occupations_.data() + i * modes_, modes_};
  }
  int occupation(std::size_t i, std::size_t j) const { return occupations_[i * modes_ + j]; }
  int total(std::size_t i) const { return totals_[i]; }

  // Ordinal of a tuple, or -1 if it lies outside the caps.
  std::int64_t index_of(std::span<const int> config) const;
  // Ordinal of config i with mode j raised / lowered by one, or -1.
  std::int32_t raised(std::size_t i, std::size_t j) const { return raised_[j * dim() + i]; }
  std::int32_t lowered(std::size_t i, std::size_t j) const { return lowered_[j * dim() + i]; }

  std::uint64_t hash() const { return hash_; }

 private:
  std::uint64_t rank(std::span<const int> config, int total) const;

  std::size_t modes_;
  int n_max_;
  int total_max_;
  std::vector<std::uint8_t> occupations_;
  std::vector<std::uint16_t> totals_;
  std::vector<std::int32_t> raised_;
  std::vector<std::int32_t> lowered_;
  // tuples_[r * (total_max_ + 1) + s]: tuples of length r summing to s.
  std::vector<std::uint64_t> tuples_;
  std::vector<std::uint64_t> block_offset_;
  std::uint64_t hash_ = 0;
};

FockSpace enumerate_fock(std::size_t modes, int n_max, int total_max,
                         std::size_t max_dim = FockSpace::kDefaultMaxDim);

// (a_j v)(n) = sqrt(n_j + 1) v(n + e_j); zero where n + e_j leaves the caps.
StateVector apply_annihilation(std::size_t j, const StateVector& v, const FockSpace& fs);
// Adjoint of apply_annihilation on the truncated space.
StateVector apply_creation(std::size_t j, const StateVector& v, const FockSpace& fs);
StateVector apply_number(const StateVector& v, const FockSpace& fs);

}  // namespace nelson::field
