#include <doctest.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>

#include "nelson/errors.hpp"
#include "nelson/ircheck.hpp"
#include "oracles.hpp"

using namespace nelson;
using namespace nelson::ircheck;

namespace {

constexpr double pi2 = std::numbers::pi * std::numbers::pi;

struct Solved {
  atomic::AtomicBasis basis;
  std::shared_ptr<const field::ModeSet> modes;
  PlaneWaveSet waves;
  NelsonMatrix h;
  GroundState gs;
  Eigen::MatrixXd x2;
};

atomic::GridSpec line_grid(int points = 81) {
  atomic::GridSpec g;
  g.dim = 1;
  g.half_extent = 8.0;
  g.points = points;
  return g;
}

Solved solve_coupled(const atomic::PotentialSpec& v, std::size_t levels, const field::ModeParams& p, int total_max,
                     double q) {
  Solved s;
  s.basis = atomic::solve_atomic(v, line_grid(), levels);
  s.modes = std::make_shared<const field::ModeSet>(field::build_modes(p));
  auto fock = std::make_shared<const field::FockSpace>(s.modes->size(), total_max, total_max);
  s.waves = model::build_plane_waves(s.basis, *s.modes);
  s.h = model::assemble_hamiltonian(q, s.basis, s.modes, fock, s.waves);
  s.gs = model::solve_ground(s.h, {});
  s.x2 = atomic::position_moment_matrices(s.basis, 0.0).x2;
  return s;
}

Solved solve_frozen(const field::ModeParams& p, int total_max, double q) {
  Solved s;
  s.modes = std::make_shared<const field::ModeSet>(field::build_modes(p));
  auto fock = std::make_shared<const field::FockSpace>(s.modes->size(), total_max, total_max);
  s.h = model::assemble_van_hove(s.modes, fock, -0.5, q);
  s.waves = model::frozen_plane_waves(*s.modes, s.h.basis_hash);
  s.gs = model::solve_ground(s.h, {});
  s.x2 = Eigen::MatrixXd::Zero(1, 1);
  return s;
}

double number_expectation(const Solved& s) {
  return spectral::expectation(s.gs.psi, [&](const StateVector& v) { return model::apply_number(s.h, v); });
}

double sum_annihilated(const Solved& s) {
  double sum = 0.0;
  for (std::size_t j = 0; j < s.modes->size(); ++j) sum += model::apply_mode_annihilation(s.h, j, s.gs.psi).squaredNorm();
  return sum;
}

model::ModelConfig tiny_config(model::ModelKind kind, double q) {
  model::ModelConfig cfg;
  cfg.kind = kind;
  cfg.q = q;
  cfg.grid = line_grid();
  cfg.levels = 2;
  cfg.shells_per_decade = 3;
  cfg.total_max = 3;
  return cfg;
}

class MemoryStore final : public GroundStateStore {
 public:
  std::optional<GroundState> load(const std::string& key) override {
    std::lock_guard lock(mutex_);
    auto it = states_.find(key);
    if (it == states_.end()) return std::nullopt;
    ++hits;
    return it->second;
  }
  void store(const std::string& key, const GroundState& gs) override {
    std::lock_guard lock(mutex_);
    states_[key] = gs;
  }
  int hits = 0;

 private:
  std::mutex mutex_;
  std::map<std::string, GroundState> states_;
};

}  // namespace

TEST_SUITE("ircheck") {

TEST_CASE("number identity and decomposition invariants on random configurations") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uq(-1.5, 1.5), uk(0.05, 0.5), uw(0.6, 1.6);
  std::uniform_int_distribution<int> ushell(1, 4), ucap(2, 4), ulev(1, 3), udir(0, 1);
  int configs = 0;
  for (int trial = 0; trial < 12; ++trial) {
    field::ModeParams p;
    p.kappa = uk(rng);
    p.lambda = 1.0;
    p.shells = ushell(rng);
    p.directions = udir(rng) ? 6 : 1;
    if (p.directions == 6) p.shells = 1;
    const double q = uq(rng);
    const int cap = ucap(rng);
    const bool frozen = trial % 4 == 3;
    const Solved s = frozen ? solve_frozen(p, cap, q)
                            : solve_coupled(atomic::PotentialSpec::harmonic(uw(rng)), ulev(rng), p, cap, q);
    ++configs;

    const double n = number_expectation(s);
    CHECK(std::abs(n - sum_annihilated(s)) <= 1e-10);

    const PullThroughReport pt = pull_through_residual(s.gs, s.h, s.waves, {});
    const JDecomposition jd = j_decomposition(s.gs, s.h, s.waves, s.x2, p.kappa, p.lambda, {}, true);
    CHECK(jd.s1 >= 0.0);
    CHECK(jd.s2 >= 0.0);
    CHECK(std::abs(jd.n_meas - n) <= 1e-10);
    CHECK(std::abs(jd.s1 - jd.s1_identity) <= 1e-12 * std::max(1.0, jd.s1_identity));
    CHECK(std::abs(jd.s1_identity - q * q * s.modes->coupling_moment(2)) <= 1e-14);
    // a_j psi - J1_j - J2_j is the pull-through residual mode by mode.
    for (std::size_t j = 0; j < s.modes->size(); ++j) CHECK(std::abs(jd.residual_norms[j] - pt.norms[j]) <= 1e-9);
    CHECK(jd.s2 <= jd.s2_cap_discrete * (1.0 + 1e-9) + 1e-12);

    const Ine1Check c = check_ine1(n, jd.s1, jd.s2, jd.x2, pt.sum_squares, q, p.kappa, p.lambda);
    CHECK(c.allowance == doctest::Approx(4.0 * pt.sum_squares));
    CHECK(c.triangles_ok);
    CHECK(n <= 2 * jd.s1 + 2 * jd.s2 + c.allowance + 1e-12);
    CHECK(jd.s1 <= 2 * n + 2 * jd.s2 + c.allowance + 1e-12);

    if (frozen) {
      for (const auto& v : jd.j2) CHECK(v.norm() <= 1e-15);
      CHECK(jd.s2 == 0.0);
    }
  }
  CHECK(configs >= 10);
}

TEST_CASE("zero coupling gives vanishing residuals and a degenerate bracket") {
  field::ModeParams p;
  p.kappa = 0.2;
  p.shells = 3;
  const Solved s = solve_coupled(atomic::PotentialSpec::harmonic(1.0), 2, p, 3, 0.0);
  const PullThroughReport pt = pull_through_residual(s.gs, s.h, s.waves, {});
  CHECK(pt.max == 0.0);
  const JDecomposition jd = j_decomposition(s.gs, s.h, s.waves, s.x2, 0.2, 1.0, {});
  CHECK(jd.s1 == 0.0);
  CHECK(jd.s2 == 0.0);
  CHECK(jd.n_meas <= 1e-24);
  const Ine1Check c = check_ine1(0.0, 0.0, 0.0, jd.x2, 0.0, 0.0, 0.2, 1.0);
  CHECK(c.lower == 0.0);
  CHECK(c.upper == 0.0);
  CHECK(c.bracket_ok);
}

TEST_CASE("frozen particle: residual at the cap and the number equals S1") {
  field::Mode m;
  m.k = {0.0, 0.0, 1.0};
  m.omega = 1.0;
  m.weight = 1.0;
  m.amp = 0.1;
  auto modes = std::make_shared<const field::ModeSet>(field::ModeSet::from_modes({m}));
  auto fock = std::make_shared<const field::FockSpace>(1, 10, 10);
  const NelsonMatrix h = model::assemble_van_hove(modes, fock, 0.0, 1.0);
  const GroundState gs = model::solve_ground(h, {});
  const PlaneWaveSet waves = model::frozen_plane_waves(*modes, h.basis_hash);
  CHECK(pull_through_residual(gs, h, waves, {}).max <= 1e-8);
  const JDecomposition jd = j_decomposition(gs, h, waves, Eigen::MatrixXd::Zero(1, 1), 0.5, 1.0, {});
  CHECK(std::abs(jd.s1 - jd.n_meas) <= 1e-12);
  const Ine1Check c = check_ine1(jd.n_meas, jd.s1, jd.s2, 0.0, 0.0, 1.0, 0.5, 1.0);
  CHECK(c.slack_triangle_s1 == doctest::Approx(jd.s1).epsilon(1e-9));
  CHECK(c.slack_triangle_n == doctest::Approx(jd.s1).epsilon(1e-9));
}

TEST_CASE("soft-boson bracket formulas") {
  const double q = 0.5, kappa = 0.05, lambda = 1.0, x2 = 0.7;
  const double log_ratio = std::log(lambda / kappa);
  const Ine1Check c = check_ine1(0.02, 0.02, 0.001, x2, 0.0, q, kappa, lambda);
  CHECK(c.lower == doctest::Approx(q * q / (8 * pi2) * (log_ratio - lambda * lambda * x2)));
  CHECK(c.upper == doctest::Approx(q * q / (2 * pi2) * log_ratio + q * q * lambda * lambda * x2 / (4 * pi2)));
  CHECK(c.slack_lower == doctest::Approx(0.02 - c.lower));
  CHECK(c.slack_upper == doctest::Approx(c.upper - 0.02));
  const Ine1Check bad = check_ine1(1.0, 0.02, 0.001, x2, 0.0, q, kappa, lambda);
  CHECK_FALSE(bad.bracket_ok);
  CHECK_FALSE(bad.triangles_ok);
  CHECK(bad.slack_upper < 0.0);
}

TEST_CASE("Kato-Rellich constants") {
  const double lambda = 1.0;
  for (double eps : {0.01, 0.5, 3.0}) {
    for (double eps_prime : {0.02, 1.0, 40.0}) {
      const double pre = std::sqrt(lambda) / (2.0 * std::numbers::pi);
      CHECK(kato_rellich_relative(lambda, eps, eps_prime) ==
            doctest::Approx(pre * std::sqrt(2 * eps_prime * (2 + eps))));
      CHECK(kato_rellich_absolute(lambda, eps, eps_prime) ==
            doctest::Approx(pre * std::sqrt((2 + eps) / (2 * eps_prime) + 0.5 * (1 + 1 / (2 * eps)) * lambda)));
    }
  }

  const ConstantsReport small = compute_cq(1e-9, lambda, std::pair{2.0, 0.0});
  REQUIRE(small.has_bound());
  CHECK(std::abs(small.cq - 1.0) <= 1e-6);
  CHECK(std::abs(small.x2_bound - 4.0) <= 1e-5);

  const ConstantsReport r = compute_cq(0.5, lambda, std::pair{2.0, 0.0});
  REQUIRE(r.feasible);
  CHECK(1.0 - 0.5 * r.c_relative > 0.0);
  // Brute-force minimum over the same logarithmic grid.
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 60; ++i) {
    for (int k = 0; k < 60; ++k) {
      const double e = std::pow(10.0, -3.0 + 6.0 * i / 59.0), ep = std::pow(10.0, -3.0 + 6.0 * k / 59.0);
      const double den = 1.0 - 0.5 * kato_rellich_relative(lambda, e, ep);
      if (den <= 0.0) continue;
      best = std::min(best, (1.0 + 0.5 * kato_rellich_absolute(lambda, e, ep) + 0.25 / (8 * pi2)) / den);
    }
  }
  CHECK(r.cq == doctest::Approx(best).epsilon(1e-14));
  CHECK(r.x2_bound == doctest::Approx(2.0 * r.cq * r.cq + 2.0));

  const ConstantsReport big = compute_cq(1e3, 10.0);
  CHECK_FALSE(big.feasible);
  CHECK_FALSE(big.has_bound());
}

TEST_CASE("least squares and kappa validation") {
  const double x[] = {0.0, 1.0, 2.0, 3.0};
  const double y[] = {1.0, 3.0, 5.0, 7.0};
  const LinearFit f = least_squares(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.points == 4);

  const double ok[] = {0.2, 0.1};
  CHECK_NOTHROW(validate_kappas(ok, 1.0));
  const double above[] = {0.5, 1.0};
  try {
    validate_kappas(above, 1.0);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.field_path() == "kappas[1]");
  }
  const double rising[] = {0.1, 0.2};
  CHECK_THROWS_AS(validate_kappas(rising, 1.0), ConfigError);
  const double zero[] = {0.1, 0.0};
  CHECK_THROWS_AS(validate_kappas(zero, 1.0), ConfigError);
}

TEST_CASE("frozen-particle sweep at zero coupling has zero slope") {
  const double kappas[] = {0.2, 0.1, 0.05};
  SweepOptions opt;
  const SweepReport rep = kappa_sweep(tiny_config(model::ModelKind::van_hove, 0.0), kappas, opt);
  REQUIRE(rep.accepted() == 3);
  for (const auto& r : rep.records) CHECK(r.n_expect == 0.0);
  CHECK(std::abs(rep.fit.slope) <= 1e-12);
  CHECK(rep.theorems_ok());
}

TEST_CASE("coupled sweep records, cache reuse and monotone growth") {
  model::ModelConfig cfg = tiny_config(model::ModelKind::coupled, 0.8);
  const double kappas[] = {0.3, 0.1, 0.03};
  MemoryStore store;
  SweepOptions opt;
  opt.store = &store;
  opt.jobs = 2;
  const SweepReport cold = kappa_sweep(cfg, kappas, opt);
  const SweepReport warm = kappa_sweep(cfg, kappas, opt);
  CHECK(store.hits == 3);
  REQUIRE(cold.records.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const IrRecord& a = cold.records[i];
    const IrRecord& b = warm.records[i];
    CHECK(a.accepted);
    CHECK(a.energy == b.energy);
    CHECK(a.n_expect == b.n_expect);
    CHECK(a.s2 == b.s2);
    CHECK(a.key == b.key);
    CHECK(a.number_identity_error <= 1e-10);
    CHECK(a.floor_ok);
    CHECK(a.s2_cap_ok);
    CHECK(a.checks_ok());
    if (i > 0) CHECK(a.key != cold.records[i - 1].key);
  }
  CHECK(cold.monotone_growth);
  REQUIRE(cold.constants.has_value());
  CHECK(cold.theorems_ok());

  cfg.q = 0.4;
  const SweepReport other = kappa_sweep(cfg, kappas, opt);
  CHECK(other.records[0].key != cold.records[0].key);
}

TEST_CASE("tail gate rejects under-truncated points") {
  model::ModelConfig cfg = tiny_config(model::ModelKind::van_hove, 3.0);
  cfg.total_max = 1;
  const double kappas[] = {0.1};
  SweepOptions opt;
  opt.tail_gate = 1e-12;
  const SweepReport rep = kappa_sweep(cfg, kappas, opt);
  CHECK(rep.solved() == 1);
  CHECK(rep.accepted() == 0);
}

TEST_CASE("position moments and localization") {
  const atomic::GridSpec g = line_grid(161);
  const atomic::AtomicBasis hb = atomic::solve_atomic(atomic::PotentialSpec::harmonic(1.0), g, 2);
  field::ModeParams p;
  p.kappa = 0.2;
  p.shells = 2;
  auto modes = std::make_shared<const field::ModeSet>(field::build_modes(p));
  auto fock = std::make_shared<const field::FockSpace>(modes->size(), 2, 2);
  const NelsonMatrix h = model::assemble_hamiltonian(0.0, hb, modes, fock, model::build_plane_waves(hb, *modes));
  const GroundState gs = model::solve_ground(h, {});
  const Moments m = position_moments(h, gs.psi, atomic::position_moment_matrices(hb, 0.0));
  CHECK(std::abs(m.dx - std::sqrt(0.5)) <= 1e-2);
  CHECK(std::abs(m.mean[0]) <= 1e-10);
  CHECK(m.exp_abs_x == doctest::Approx(1.0).epsilon(1e-12));

  const auto well = atomic::PotentialSpec::gaussian_well(5.0, 1.0);
  const atomic::AtomicBasis wb = atomic::solve_atomic(well, g, 2);
  const NelsonMatrix hw = model::assemble_hamiltonian(0.3, wb, modes, fock, model::build_plane_waves(wb, *modes));
  const GroundState gw = model::solve_ground(hw, {});
  const LocalizationReport zero =
      localization_report(hw, gw.psi, atomic::position_moment_matrices(wb, 0.0), 0.0, 3.0, well, g, wb.energies[0]);
  CHECK(zero.finite);
  CHECK(zero.moments.exp_abs_x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(zero.margin > 0.0);
  const LocalizationReport half =
      localization_report(hw, gw.psi, atomic::position_moment_matrices(wb, 1.0), 0.5, 3.0, well, g, wb.energies[0]);
  CHECK(half.finite);
  CHECK(half.moments.exp_abs_x > 1.0);
  CHECK_THROWS_AS(localization_report(hw, gw.psi, atomic::position_moment_matrices(wb, 6.0), 3.0, 3.0, well, g,
                                      wb.energies[0]),
                  InfeasibleError);
  CHECK(sup_potential_outside(well, g, 3.0) == doctest::Approx(5.0 * std::exp(-3.1 * 3.1 / 2.0)).epsilon(0.2));
}

TEST_CASE("binding energy") {
  model::ModelConfig cfg = tiny_config(model::ModelKind::coupled, 0.0);
  cfg.potential = atomic::PotentialSpec::gaussian_well(5.0, 1.0);
  const BindingReport zero = binding_energy(cfg, 0.1);
  // Decoupled: the binding energy is the gap between the free box and the atom.
  CHECK(std::abs(zero.binding - (zero.free_offset - zero.atomic_energy)) <= 1e-9);
  CHECK(zero.free_offset >= 0.0);
  CHECK(zero.ok);

  cfg.q = 0.6;
  const BindingReport plus = binding_energy(cfg, 0.1);
  cfg.q = -0.6;
  const BindingReport minus = binding_energy(cfg, 0.1);
  CHECK(std::abs(plus.binding - minus.binding) <= 1e-9);
  CHECK(plus.ok);

  cfg.potential = atomic::PotentialSpec::harmonic(1.0);
  CHECK_THROWS_AS(binding_energy(cfg, 0.1), UnsupportedError);
}

}  // TEST_SUITE
