#pragma once

// Quantitative checks on solved ground states: pull-through residuals, the
// dipole split of a_j psi, the soft-boson number bracket, kappa sweeps,
// binding energy, localization and the Kato-Rellich constant C_q.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nelson/atomic.hpp"
#include "nelson/model.hpp"

namespace nelson::ircheck {

using model::GroundState;
using model::NelsonMatrix;
using model::PlaneWaveSet;
using model::SolverTolerances;
using spectral::StateVector;

// Absolute round-off allowance added to every inequality verdict.
inline constexpr double kRoundoff = 1e-12;

// ---------------------------------------------------------------- pull-through

struct PullThroughReport {
  std::vector<double> norms;  // ||r_j|| per mode
  double max = 0.0;
  double mean = 0.0;
  double sum_squares = 0.0;
  double tail_weight = 0.0;
  double ratio_to_tail = 0.0;  // max / sqrt(tail_weight); inf when the tail is exactly 0
};

// r_j = a_j psi + q g_j (H - E + omega_j)^-1 (W_j x 1) psi
PullThroughReport pull_through_residual(const GroundState& gs, const NelsonMatrix& h,
                                        const PlaneWaveSet& waves, const SolverTolerances& tol);

// ---------------------------------------------------------------- dipole split

struct JDecomposition {
  std::vector<StateVector> j1;  // -(q g_j / omega_j) psi
  std::vector<StateVector> j2;  // -q g_j R_j ((W_j - 1) x 1) psi
  std::vector<double> residual_norms;  // ||a_j psi - J1_j - J2_j||
  double s1 = 0.0;
  double s2 = 0.0;
  double n_meas = 0.0;  // sum_j ||a_j psi||^2
  double s1_identity = 0.0;  // q^2 sum g_j^2 / omega_j^2
  double residual_sum_squares = 0.0;
  double x2 = 0.0;  // <x^2> used for the caps
  double s1_continuum = 0.0;  // q^2 log(Lambda/kappa) / (4 pi^2)
  double s2_cap_continuum = 0.0;  // q^2 Lambda^2 <x^2> / (8 pi^2)
  double s2_cap_discrete = 0.0;  // q^2 sum g_j^2 |k_j|^2 / omega_j^2 <x^2>
};

// `x2` is the M x M matrix of |x|^2 in the atomic basis (a 1x1 zero for the
// frozen particle). Keeps the J vectors only when `keep_vectors` is set.
JDecomposition j_decomposition(const GroundState& gs, const NelsonMatrix& h, const PlaneWaveSet& waves,
                               const Eigen::MatrixXd& x2, double kappa, double lambda,
                               const SolverTolerances& tol, bool keep_vectors = false);

// ---------------------------------------------------------------- soft-boson bracket

struct Ine1Check {
  double lower = 0.0;
  double upper = 0.0;
  double slack_lower = 0.0;  // N - lower
  double slack_upper = 0.0;  // upper - N
  double slack_triangle_n = 0.0;  // 2 S1 + 2 S2 - N
  double slack_triangle_s1 = 0.0;  // 2 N + 2 S2 - S1
  double allowance = 0.0;  // 4 sum_j ||r_j||^2
  bool bracket_ok = false;
  bool triangles_ok = false;
};

Ine1Check check_ine1(double n_expect, double s1, double s2, double x2, double residual_sum_squares,
                     double q, double kappa, double lambda);

// ---------------------------------------------------------------- constants

struct ConstantsReport {
  double q = 0.0;
  double lambda = 0.0;
  bool feasible = false;
  double eps = 0.0;
  double eps_prime = 0.0;
  double c_relative = 0.0;  // C^(1): relative bound of H_I w.r.t. H_0 + 1
  double c_absolute = 0.0;  // C^(2)
  double cq = 0.0;
  std::optional<std::pair<double, double>> c12;  // C1 potential constants
  double x2_bound = 0.0;  // c1 C_q^2 + c1 + c2; meaningful when feasible and c12 set
  bool has_bound() const { return feasible && c12.has_value(); }
};

double kato_rellich_relative(double lambda, double eps, double eps_prime);
double kato_rellich_absolute(double lambda, double eps, double eps_prime);

// Grid search over eps, eps' in 1e-3..1e3 (60 log-spaced points each).
ConstantsReport compute_cq(double q, double lambda,
                           std::optional<std::pair<double, double>> c12 = std::nullopt);

// ---------------------------------------------------------------- localization

struct Moments {
  std::vector<double> mean;  // <x_i>
  double x2 = 0.0;
  double abs_x = 0.0;
  double dx = 0.0;  // sqrt(<x^2> - <x>.<x>)
  double exp_abs_x = 1.0;  // <exp(c |x|)> with c = ops.decay_rate
};

Moments position_moments(const NelsonMatrix& h, const StateVector& psi, const atomic::AtomicOperators& ops);

struct LocalizationReport {
  double c0 = 0.0;
  double n0 = 0.0;
  double atomic_energy = 0.0;
  double sup_outside = 0.0;  // sup_{|x| > N0} |V| over grid nodes
  double margin = 0.0;  // |E_at| - sup_outside - c0^2
  Moments moments;
  bool finite = false;
};

// Largest |V| over interior nodes farther than `radius` from the origin.
double sup_potential_outside(const atomic::PotentialSpec& potential, const atomic::GridSpec& grid,
                             double radius);

// Throws InfeasibleError when the margin is not positive. `ops` must carry
// decay_rate = 2 c0.
LocalizationReport localization_report(const NelsonMatrix& h, const StateVector& psi,
                                       const atomic::AtomicOperators& ops, double c0, double n0,
                                       const atomic::PotentialSpec& potential,
                                       const atomic::GridSpec& grid, double atomic_energy);

// ---------------------------------------------------------------- sweep

struct CheckFlags {
  bool pull_through = true;
  bool ine1 = true;
  bool binding = false;
  bool localization = false;
  bool constants = true;
};

// Ground states keyed by content hash; implementations must be thread safe.
class GroundStateStore {
 public:
  virtual ~GroundStateStore() = default;
  virtual std::optional<GroundState> load(const std::string& key) = 0;
  virtual void store(const std::string& key, const GroundState& gs) = 0;
};

struct SweepOptions {
  std::size_t jobs = 1;
  CheckFlags checks;
  double tail_gate = 1e-4;
  double c0 = 0.0;
  double n0 = 0.0;
  GroundStateStore* store = nullptr;
};

struct IrRecord {
  double kappa = 0.0;
  int shells = 0;
  std::size_t modes = 0;
  std::size_t dim = 0;
  std::string key;

  bool solved = false;
  bool accepted = false;  // solved and tail weight under the gate
  std::string error;

  double energy = 0.0;
  double eig_residual = 0.0;
  double gap_estimate = 0.0;
  double tail_weight = 0.0;
  double n_expect = 0.0;
  double n_sum_a = 0.0;
  double number_identity_error = 0.0;

  double s1 = 0.0;
  double s2 = 0.0;
  double s1_identity = 0.0;
  double s2_cap_discrete = 0.0;
  double s2_cap_continuum = 0.0;
  double decomposition_mismatch = 0.0;  // max_j | ||r_j|| (direct) - ||r_j|| (via J) |

  double pt_resid_max = 0.0;
  double pt_resid_mean = 0.0;
  double pt_resid_sum_squares = 0.0;
  double pt_ratio = 0.0;

  Moments moments;
  bool ine1_checked = false;
  Ine1Check ine1;
  model::EnergyBracket bracket;  // literal self-energy bracket
  double bracket_tol = 0.0;
  bool bracket_ok = false;
  model::EnergyBracket floor_bracket;  // completed-square bracket
  bool floor_ok = false;
  bool s2_cap_ok = true;
  bool x2_bound_ok = true;  // measured <x^2> vs c1 C_q^2 + c1 + c2
  std::optional<LocalizationReport> localization;
  std::string localization_error;

  bool checks_ok() const;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

struct SweepReport {
  model::ModelKind kind = model::ModelKind::coupled;
  double q = 0.0;
  double lambda = 0.0;
  std::vector<double> atomic_energies;
  std::vector<IrRecord> records;
  LinearFit fit;
  double bracket_low = 0.0;  // q^2 / (8 pi^2)
  double bracket_high = 0.0;  // q^2 / (2 pi^2)
  double slope_margin = 0.0;  // allowance for the <x^2> offsets
  bool slope_in_bracket = false;
  double sup_x2 = 0.0;
  bool monotone_growth = true;
  std::optional<ConstantsReport> constants;

  std::size_t solved() const;
  std::size_t accepted() const;
  // Every accepted record passes its theorem-backed checks and, for the
  // frozen particle, the fitted slope sits inside the bracket.
  bool theorems_ok() const;
};

// Strictly decreasing, every entry in (0, lambda).
void validate_kappas(std::span<const double> kappas, double lambda);

// Content key of a ground state: atomic basis, modes, Fock caps, q and
// eigen-solver settings.
std::string ground_state_key(const NelsonMatrix& h, const SolverTolerances& tol);

// Atomic basis for a coupled config (levels, tolerances and grid from cfg).
atomic::AtomicBasis solve_config_atomic(const model::ModelConfig& cfg);

SweepReport kappa_sweep(const model::ModelConfig& cfg, std::span<const double> kappas,
                        const SweepOptions& opt);
// Reuses a precomputed atomic basis (ignored for the frozen particle).
SweepReport kappa_sweep(const model::ModelConfig& cfg, const atomic::AtomicBasis* basis,
                        std::span<const double> kappas, const SweepOptions& opt);

// ---------------------------------------------------------------- binding

struct BindingReport {
  double kappa = 0.0;
  double energy = 0.0;  // with V
  double energy_free = 0.0;  // V = 0 on the same grid and truncation
  double binding = 0.0;  // energy_free - energy
  double atomic_energy = 0.0;
  double free_offset = 0.0;  // box ground energy of the free particle
  double tolerance = 0.0;  // free_offset + 1e-3
  double margin = 0.0;  // binding - (-E_at - tolerance)
  bool ok = false;
};

inline constexpr double kBindingGridTol = 1e-3;

BindingReport binding_energy(const model::ModelConfig& cfg, double kappa,
                             const atomic::AtomicBasis* basis = nullptr);

}  // namespace nelson::ircheck
