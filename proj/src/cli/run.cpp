#include <cmath>
#include <fstream>
#include <memory>
#include <ostream>

#include "nelson/cli.hpp"
#include "nelson/errors.hpp"

namespace nelson::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& text, RunOutcome& outcome) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
  outcome.artifacts.push_back(path);
}

fs::path prepare_out(const RunConfig& cfg, RunOutcome& outcome) {
  const fs::path dir = cfg.out;
  fs::create_directories(dir);
  write_file(dir / "config.toml", emit_toml(cfg), outcome);
  return dir;
}

std::unique_ptr<FileGroundStateStore> open_store(const RunConfig& cfg) {
  if (!cfg.cache) return nullptr;
  return std::make_unique<FileGroundStateStore>(fs::path(cfg.out) / "cache");
}

ircheck::SweepOptions sweep_options(const RunConfig& cfg, ircheck::GroundStateStore* store) {
  ircheck::SweepOptions opt;
  opt.jobs = cfg.jobs;
  opt.checks = cfg.checks;
  opt.tail_gate = cfg.tail_gate;
  opt.c0 = cfg.c0;
  opt.n0 = cfg.n0;
  opt.store = store;
  return opt;
}

struct SweepRun {
  ircheck::SweepReport report;
  std::vector<ircheck::BindingReport> binding;
};

SweepRun sweep_with_binding(const RunConfig& cfg, const ircheck::SweepOptions& opt, std::ostream& log) {
  if (cfg.kappas.empty()) throw ConfigError("sweep.kappas", "need at least one infrared cutoff");
  SweepRun run;
  std::optional<atomic::AtomicBasis> basis;
  if (cfg.model.kind == model::ModelKind::coupled) {
    basis = ircheck::solve_config_atomic(cfg.model);
    log << "atomic: " << basis->size() << " levels, E_at = " << format_double(basis->ground_energy()) << '\n';
  }
  run.report = ircheck::kappa_sweep(cfg.model, basis ? &*basis : nullptr, cfg.kappas, opt);

  if (opt.checks.binding) {
    if (cfg.model.kind != model::ModelKind::coupled ||
        cfg.model.potential.declared_class != atomic::PotentialClass::c2) {
      log << "binding: skipped, needs a coupled model with a C2 potential\n";
    } else {
      for (const auto& rec : run.report.records) {
        if (!rec.accepted) continue;
        run.binding.push_back(ircheck::binding_energy(cfg.model, rec.kappa, &*basis));
      }
    }
  }
  return run;
}

int sweep_exit_code(const SweepRun& run) {
  if (run.report.solved() == 0) return kExitSolver;
  bool ok = run.report.theorems_ok();
  for (const auto& b : run.binding) ok = ok && b.ok;
  return ok ? kExitOk : kExitTheorem;
}

void log_sweep(const SweepRun& run, std::ostream& log) {
  for (const auto& r : run.report.records) {
    log << "kappa " << format_double(r.kappa) << ": ";
    if (!r.solved) {
      log << "failed: " << r.error << '\n';
      continue;
    }
    log << "E = " << format_double(r.energy) << ", <N> = " << format_double(r.n_expect)
        << ", tail = " << format_double(r.tail_weight) << (r.accepted ? "" : " (rejected by tail gate)")
        << (r.checks_ok() ? "" : " CHECK FAILED") << '\n';
  }
  log << "slope " << format_double(run.report.fit.slope) << " over " << run.report.fit.points << " points\n";
}

RunOutcome write_sweep(const RunConfig& cfg, const SweepRun& run, const fs::path& dir, const std::string& stem,
                       RunOutcome outcome) {
  std::ostringstream csv;
  write_sweep_csv(csv, run.report);
  write_file(dir / (stem + ".csv"), csv.str(), outcome);
  write_file(dir / (stem + ".json"), dump_json(sweep_summary(cfg, run.report, run.binding)), outcome);
  outcome.exit_code = sweep_exit_code(run);
  return outcome;
}

}  // namespace

RunOutcome run_atomic(const RunConfig& cfg, std::ostream& log) {
  if (cfg.model.kind != model::ModelKind::coupled) throw ConfigError("model.kind", "atomic needs a coupled model");
  RunOutcome outcome;
  const fs::path dir = prepare_out(cfg, outcome);
  const atomic::AtomicBasis basis = ircheck::solve_config_atomic(cfg.model);
  const atomic::ClassReport cls = atomic::validate_class(cfg.model.potential, basis);

  std::ostringstream csv;
  csv << "level,energy,residual\n";
  for (std::size_t a = 0; a < basis.size(); ++a) {
    csv << a << ',' << format_double(basis.energies[a]) << ',' << format_double(basis.residuals[a]) << '\n';
    log << "level " << a << ": " << format_double(basis.energies[a]) << '\n';
  }
  write_file(dir / "atomic.csv", csv.str(), outcome);

  json config = config_to_json(cfg);
  config.erase("output");
  json j;
  j["config"] = config;
  j["energies"] = basis.energies;
  j["residuals"] = basis.residuals;
  j["grid"] = {{"spacing", cfg.model.grid.spacing()}, {"unknowns", cfg.model.grid.unknowns()}};
  j["class"] = {{"name", atomic::to_string(cls.cls)},
                {"c1", cls.c1},
                {"c2", cls.c2},
                {"ground_energy", cls.ground_energy},
                {"decay_radii", cls.decay_radii},
                {"decay_sup", cls.decay_sup},
                {"min_ground_component", cls.min_ground_component},
                {"negative_nodes", cls.negative_nodes}};
  write_file(dir / "atomic.json", dump_json(j), outcome);
  return outcome;
}

RunOutcome run_oracle(const RunConfig& cfg, std::ostream& log) {
  RunOutcome outcome;
  const fs::path dir = prepare_out(cfg, outcome);
  const OracleSpec& spec = cfg.oracle;

  std::vector<field::Mode> modes;
  for (std::size_t j = 0; j < spec.omegas.size(); ++j) {
    field::Mode m;
    m.k = {0.0, 0.0, spec.omegas[j]};
    m.omega = spec.omegas[j];
    m.weight = 1.0;
    m.amp = spec.couplings[j];
    modes.push_back(m);
  }
  auto mode_set = std::make_shared<const field::ModeSet>(field::ModeSet::from_modes(std::move(modes)));
  const double q = cfg.model.q;
  const double e_at = cfg.model.frozen_energy;
  const model::VanHoveSolution exact = model::van_hove_closed_form(*mode_set, e_at, q);

  std::ostringstream csv;
  csv << "n_max,dim,E_diag,E_closed,dE,N_diag,N_closed,dN,tail_weight,eig_residual,pt_resid_max\n";
  json rows = json::array();
  bool ok = true;
  const int first = std::min(4, spec.n_max);
  for (int n = first; n <= spec.n_max; ++n) {
    auto fock = std::make_shared<const field::FockSpace>(mode_set->size(), n, n, cfg.model.max_dim);
    const model::NelsonMatrix h = model::assemble_van_hove(mode_set, fock, e_at, q);
    const model::GroundState gs = model::solve_ground(h, cfg.model.tol);
    const double number =
        spectral::expectation(gs.psi, [&](const spectral::StateVector& v) { return model::apply_number(h, v); });
    const auto waves = model::frozen_plane_waves(*mode_set, h.basis_hash);
    const auto pt = ircheck::pull_through_residual(gs, h, waves, cfg.model.tol);
    const double de = gs.energy - exact.energy;
    const double dn = number - exact.number;
    const double allowed = 10.0 * gs.tail_weight + 1e-8;
    const bool row_ok = std::abs(de) <= allowed && std::abs(dn) <= allowed;
    ok = ok && row_ok;
    const double fields[] = {gs.energy, exact.energy, de, number, exact.number, dn, gs.tail_weight, gs.eig_residual, pt.max};
    csv << n << ',' << h.dim();
    for (double v : fields) csv << ',' << format_double(v);
    csv << '\n';
    rows.push_back({{"n_max", n},
                    {"dim", h.dim()},
                    {"energy", gs.energy},
                    {"number", number},
                    {"energy_error", de},
                    {"number_error", dn},
                    {"tail_weight", gs.tail_weight},
                    {"eig_residual", gs.eig_residual},
                    {"pt_resid_max", pt.max},
                    {"ok", row_ok}});
    log << "n_max " << n << ": dE = " << format_double(de) << ", dN = " << format_double(dn) << '\n';
  }
  write_file(dir / "oracle.csv", csv.str(), outcome);

  json config = config_to_json(cfg);
  config.erase("output");
  json j;
  j["config"] = config;
  j["closed_form"] = {{"energy", exact.energy}, {"number", exact.number}, {"displacements", exact.displacements}};
  j["rows"] = rows;
  j["ok"] = ok;
  write_file(dir / "oracle.json", dump_json(j), outcome);
  outcome.exit_code = ok ? kExitOk : kExitTheorem;
  return outcome;
}

RunOutcome run_sweep(const RunConfig& cfg, std::ostream& log) {
  RunOutcome outcome;
  const fs::path dir = prepare_out(cfg, outcome);
  auto store = open_store(cfg);
  const SweepRun run = sweep_with_binding(cfg, sweep_options(cfg, store.get()), log);
  log_sweep(run, log);
  if (store) log << "cache: " << store->hits() << " hits, " << store->misses() << " misses\n";
  return write_sweep(cfg, run, dir, "sweep", std::move(outcome));
}

RunOutcome run_verify(const RunConfig& cfg, std::ostream& log) {
  if (cfg.kappas.empty()) throw ConfigError("sweep.kappas", "verify needs an infrared cutoff");
  RunConfig single = cfg;
  single.kappas = {cfg.kappas.front()};
  single.checks.pull_through = true;
  single.checks.ine1 = true;
  single.checks.constants = true;
  const bool c2 = cfg.model.kind == model::ModelKind::coupled &&
                  cfg.model.potential.declared_class == atomic::PotentialClass::c2;
  single.checks.binding = c2;
  single.checks.localization = c2;

  RunOutcome outcome;
  const fs::path dir = prepare_out(single, outcome);
  auto store = open_store(single);
  const SweepRun run = sweep_with_binding(single, sweep_options(single, store.get()), log);
  log_sweep(run, log);
  return write_sweep(single, run, dir, "verify", std::move(outcome));
}

int run_command(std::string_view command, const RunConfig& cfg, std::ostream& log) {
  try {
    RunOutcome outcome;
    if (command == "atomic") {
      outcome = run_atomic(cfg, log);
    } else if (command == "oracle") {
      outcome = run_oracle(cfg, log);
    } else if (command == "sweep") {
      outcome = run_sweep(cfg, log);
    } else if (command == "verify") {
      outcome = run_verify(cfg, log);
    } else {
      throw ConfigError("command", "unknown subcommand '" + std::string(command) + "'");
    }
    for (const auto& a : outcome.artifacts) log << "wrote " << a.string() << '\n';
    if (outcome.exit_code == kExitTheorem) log << "error: a theorem-backed check failed beyond its slack\n";
    if (outcome.exit_code == kExitSolver) log << "error: no sweep point could be solved\n";
    return outcome.exit_code;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ClassViolationError& e) {
    log << "potential does not satisfy its declared class: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidPotentialError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidGridError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CutoffOrderError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace nelson::cli
