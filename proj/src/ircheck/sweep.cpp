#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <numbers>
#include <thread>

#include "nelson/errors.hpp"
#include "nelson/hash.hpp"
#include "nelson/ircheck.hpp"

namespace nelson::ircheck {

std::string ground_state_key(const NelsonMatrix& h, const SolverTolerances& tol) {
  ContentHash key;
  key.add("ground-state")
      .add(h.basis_hash)
      .add(h.modes_hash)
      .add(h.fock_hash)
      .add(h.q)
      .add(tol.eig_tol)
      .add(static_cast<std::uint64_t>(tol.eig_max_iter))
      .add(static_cast<std::uint64_t>(tol.krylov_dim));
  for (double e : h.energies) key.add(e);
  return key.hex();
}

atomic::AtomicBasis solve_config_atomic(const model::ModelConfig& cfg) {
  atomic::AtomicSolveOptions opt;
  opt.tol = cfg.tol.atomic_tol;
  return atomic::solve_atomic(cfg.potential, cfg.grid, cfg.levels, opt);
}

namespace {

struct Assembled {
  NelsonMatrix h;
  PlaneWaveSet waves;
};

Assembled assemble_point(const model::ModelConfig& cfg, const atomic::AtomicBasis* basis, double kappa) {
  auto modes = std::make_shared<const field::ModeSet>(field::build_modes(cfg.mode_params(kappa)));
  auto fock = std::make_shared<const field::FockSpace>(modes->size(), cfg.per_mode_cap(), cfg.total_max,
                                                       cfg.max_dim);
  Assembled out;
  if (cfg.kind == model::ModelKind::coupled) {
    out.waves = model::build_plane_waves(*basis, *modes);
    out.h = model::assemble_hamiltonian(cfg.q, *basis, modes, fock, out.waves);
  } else {
    out.waves = model::frozen_plane_waves(*modes, model::frozen_basis_hash(cfg.frozen_energy));
    out.h = model::assemble_van_hove(modes, fock, cfg.frozen_energy, cfg.q);
  }
  return out;
}

struct SweepContext {
  const model::ModelConfig& cfg;
  const atomic::AtomicBasis* basis = nullptr;
  const atomic::AtomicOperators* ops = nullptr;
  const ConstantsReport* constants = nullptr;
  const SweepOptions& opt;
};

void evaluate(const SweepContext& ctx, IrRecord& rec) {
  const model::ModelConfig& cfg = ctx.cfg;
  const bool coupled = cfg.kind == model::ModelKind::coupled;
  const Assembled a = assemble_point(cfg, ctx.basis, rec.kappa);
  const NelsonMatrix& h = a.h;
  rec.shells = cfg.shells_for(rec.kappa);
  rec.modes = h.modes->size();
  rec.dim = h.dim();
  rec.key = ground_state_key(h, cfg.tol);

  std::optional<GroundState> cached;
  if (ctx.opt.store) cached = ctx.opt.store->load(rec.key);
  const GroundState gs = cached ? *cached : model::solve_ground(h, cfg.tol);
  if (!cached && ctx.opt.store) ctx.opt.store->store(rec.key, gs);
  if (static_cast<std::size_t>(gs.psi.size()) != h.dim()) throw Error("cached ground state has the wrong size");

  rec.solved = true;
  rec.energy = gs.energy;
  rec.eig_residual = gs.eig_residual;
  rec.gap_estimate = gs.gap_estimate;
  rec.tail_weight = model::tail_weight(h, gs.psi);
  rec.accepted = rec.tail_weight <= ctx.opt.tail_gate;

  rec.n_expect = spectral::expectation(gs.psi, [&](const StateVector& v) { return model::apply_number(h, v); });

  const Eigen::MatrixXd x2 = coupled ? ctx.ops->x2 : Eigen::MatrixXd::Zero(1, 1);
  const JDecomposition jd = j_decomposition(gs, h, a.waves, x2, rec.kappa, cfg.lambda, cfg.tol);
  rec.n_sum_a = jd.n_meas;
  rec.number_identity_error = std::abs(rec.n_expect - rec.n_sum_a);
  rec.s1 = jd.s1;
  rec.s2 = jd.s2;
  rec.s1_identity = jd.s1_identity;
  rec.s2_cap_discrete = jd.s2_cap_discrete;
  rec.s2_cap_continuum = jd.s2_cap_continuum;
  rec.s2_cap_ok = rec.s2 <= rec.s2_cap_discrete * (1.0 + 1e-9) + kRoundoff;

  double residual_sum_squares = jd.residual_sum_squares;
  if (ctx.opt.checks.pull_through) {
    const PullThroughReport pt = pull_through_residual(gs, h, a.waves, cfg.tol);
    rec.pt_resid_max = pt.max;
    rec.pt_resid_mean = pt.mean;
    rec.pt_resid_sum_squares = pt.sum_squares;
    rec.pt_ratio = pt.ratio_to_tail;
    for (std::size_t j = 0; j < pt.norms.size(); ++j) {
      rec.decomposition_mismatch =
          std::max(rec.decomposition_mismatch, std::abs(pt.norms[j] - jd.residual_norms[j]));
    }
    residual_sum_squares = pt.sum_squares;
  } else {
    rec.pt_resid_max = *std::max_element(jd.residual_norms.begin(), jd.residual_norms.end());
    rec.pt_resid_sum_squares = jd.residual_sum_squares;
  }

  if (coupled) {
    rec.moments = position_moments(h, gs.psi, *ctx.ops);
  } else {
    rec.moments.mean.assign(1, 0.0);
  }

  if (ctx.opt.checks.ine1) {
    rec.ine1_checked = true;
    rec.ine1 = check_ine1(rec.n_expect, rec.s1, rec.s2, rec.moments.x2, residual_sum_squares, cfg.q, rec.kappa,
                          cfg.lambda);
  }

  rec.bracket = model::self_energy_bracket(*h.modes, h.energies.front(), cfg.q);
  rec.bracket_tol = 1e-8 + rec.eig_residual;
  auto inside = [&](const model::EnergyBracket& b) {
    return b.lower - rec.bracket_tol <= rec.energy && rec.energy <= b.upper + rec.bracket_tol;
  };
  rec.bracket_ok = inside(rec.bracket);
  rec.floor_bracket = model::completed_square_bracket(*h.modes, h.energies.front(), cfg.q);
  rec.floor_ok = inside(rec.floor_bracket);

  if (ctx.constants && ctx.constants->has_bound()) {
    rec.x2_bound_ok = rec.moments.x2 <= ctx.constants->x2_bound;
  }

  if (coupled && ctx.opt.checks.localization) {
    try {
      rec.localization = localization_report(h, gs.psi, *ctx.ops, ctx.opt.c0, ctx.opt.n0, cfg.potential, cfg.grid,
                                             h.energies.front());
    } catch (const InfeasibleError& e) {
      rec.localization_error = e.what();
    }
  }
}

}  // namespace

SweepReport kappa_sweep(const model::ModelConfig& cfg, std::span<const double> kappas, const SweepOptions& opt) {
  if (cfg.kind == model::ModelKind::coupled) {
    cfg.validate();
    const atomic::AtomicBasis basis = solve_config_atomic(cfg);
    return kappa_sweep(cfg, &basis, kappas, opt);
  }
  return kappa_sweep(cfg, nullptr, kappas, opt);
}

SweepReport kappa_sweep(const model::ModelConfig& cfg, const atomic::AtomicBasis* basis,
                        std::span<const double> kappas, const SweepOptions& opt) {
  cfg.validate();
  validate_kappas(kappas, cfg.lambda);
  const bool coupled = cfg.kind == model::ModelKind::coupled;
  if (coupled && !basis) throw Error("kappa_sweep: coupled model needs an atomic basis");

  SweepReport rep;
  rep.kind = cfg.kind;
  rep.q = cfg.q;
  rep.lambda = cfg.lambda;

  std::optional<atomic::AtomicOperators> ops;
  if (coupled) {
    rep.atomic_energies = basis->energies;
    ops = atomic::position_moment_matrices(*basis, opt.checks.localization ? 2.0 * opt.c0 : 0.0);
  } else {
    rep.atomic_energies = {cfg.frozen_energy};
  }

  if (opt.checks.constants) {
    std::optional<std::pair<double, double>> c12;
    if (coupled && cfg.potential.declared_class == atomic::PotentialClass::c1) c12 = cfg.potential.c1_constants();
    rep.constants = compute_cq(cfg.q, cfg.lambda, c12);
  }

  rep.records.resize(kappas.size());
  for (std::size_t i = 0; i < kappas.size(); ++i) rep.records[i].kappa = kappas[i];

  const SweepContext ctx{cfg, basis, ops ? &*ops : nullptr, rep.constants ? &*rep.constants : nullptr, opt};
  auto run_one = [&](std::size_t i) {
    IrRecord& rec = rep.records[i];
    try {
      evaluate(ctx, rec);
    } catch (const std::exception& e) {
      rec.solved = false;
      rec.accepted = false;
      rec.error = e.what();
    }
  };

  const std::size_t jobs = std::clamp<std::size_t>(opt.jobs, 1, kappas.size());
  if (jobs == 1) {
    for (std::size_t i = 0; i < kappas.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < kappas.size(); i = next++) run_one(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  // Aggregation over accepted points, in sweep order.
  std::vector<double> logs, numbers;
  double previous = -std::numeric_limits<double>::infinity();
  for (const auto& rec : rep.records) {
    if (!rec.accepted) continue;
    logs.push_back(std::log(cfg.lambda / rec.kappa));
    numbers.push_back(rec.n_expect);
    rep.sup_x2 = std::max(rep.sup_x2, rec.moments.x2);
    if (rec.n_expect < previous - kRoundoff) rep.monotone_growth = false;
    previous = rec.n_expect;
  }
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double q2 = cfg.q * cfg.q;
  rep.bracket_low = q2 / (8.0 * pi2);
  rep.bracket_high = q2 / (2.0 * pi2);
  if (logs.size() >= 2) {
    rep.fit = least_squares(logs, numbers);
    const double span = logs.back() - logs.front();
    // Offsets of the bound are at most 3 q^2 Lambda^2 sup<x^2> / (8 pi^2) apart.
    rep.slope_margin = span > 0.0 ? 3.0 * q2 * cfg.lambda * cfg.lambda * rep.sup_x2 / (8.0 * pi2) / span : 0.0;
    if (cfg.q == 0.0) {
      rep.slope_in_bracket = std::abs(rep.fit.slope) <= kRoundoff;
    } else {
      rep.slope_in_bracket = rep.fit.slope > rep.bracket_low - rep.slope_margin &&
                             rep.fit.slope < rep.bracket_high + rep.slope_margin;
    }
  } else {
    rep.fit.points = logs.size();
  }
  return rep;
}

BindingReport binding_energy(const model::ModelConfig& cfg, double kappa, const atomic::AtomicBasis* basis) {
  cfg.validate();
  if (cfg.kind != model::ModelKind::coupled) throw UnsupportedError("binding energy needs the coupled model");
  if (cfg.potential.declared_class != atomic::PotentialClass::c2) {
    throw UnsupportedError("binding energy is only defined for C2 potentials (E_at < 0)");
  }
  const double single[] = {kappa};
  validate_kappas(single, cfg.lambda);

  std::optional<atomic::AtomicBasis> own;
  if (!basis) {
    own = solve_config_atomic(cfg);
    basis = &*own;
  }
  model::ModelConfig free_cfg = cfg;
  free_cfg.potential = atomic::PotentialSpec::free();
  const atomic::AtomicBasis free_basis = solve_config_atomic(free_cfg);

  const Assembled bound = assemble_point(cfg, basis, kappa);
  const Assembled loose = assemble_point(free_cfg, &free_basis, kappa);

  BindingReport rep;
  rep.kappa = kappa;
  rep.energy = model::solve_ground(bound.h, cfg.tol).energy;
  rep.energy_free = model::solve_ground(loose.h, cfg.tol).energy;
  rep.binding = rep.energy_free - rep.energy;
  rep.atomic_energy = basis->ground_energy();
  rep.free_offset = free_basis.ground_energy();
  rep.tolerance = rep.free_offset + kBindingGridTol;
  rep.margin = rep.binding - (-rep.atomic_energy - rep.tolerance);
  rep.ok = rep.margin >= 0.0;
  return rep;
}

}  // namespace nelson::ircheck
