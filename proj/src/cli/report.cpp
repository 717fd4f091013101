#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "nelson/cli.hpp"

namespace nelson::cli {

namespace {

using json = nlohmann::json;

json bracket_json(const model::EnergyBracket& b, bool ok) {
  return {{"lower", b.lower}, {"upper", b.upper}, {"ok", ok}};
}

json record_json(const ircheck::IrRecord& r) {
  json j;
  j["kappa"] = r.kappa;
  j["shells"] = r.shells;
  j["modes"] = r.modes;
  j["dim"] = r.dim;
  j["solved"] = r.solved;
  j["accepted"] = r.accepted;
  if (!r.solved) {
    j["error"] = r.error;
    return j;
  }
  j["key"] = r.key;
  j["energy"] = r.energy;
  j["eig_residual"] = r.eig_residual;
  j["gap_estimate"] = r.gap_estimate;
  j["tail_weight"] = r.tail_weight;
  j["n_expect"] = r.n_expect;
  j["n_sum_a"] = r.n_sum_a;
  j["number_identity_error"] = r.number_identity_error;
  j["s1"] = r.s1;
  j["s2"] = r.s2;
  j["s1_identity"] = r.s1_identity;
  j["s2_cap_discrete"] = r.s2_cap_discrete;
  j["s2_cap_continuum"] = r.s2_cap_continuum;
  j["s2_cap_ok"] = r.s2_cap_ok;
  j["decomposition_mismatch"] = r.decomposition_mismatch;
  j["pull_through"] = {{"max", r.pt_resid_max},
                       {"mean", r.pt_resid_mean},
                       {"sum_squares", r.pt_resid_sum_squares},
                       {"ratio_to_sqrt_tail", r.pt_ratio}};
  j["position"] = {{"mean", r.moments.mean},
                   {"x2", r.moments.x2},
                   {"abs_x", r.moments.abs_x},
                   {"dx", r.moments.dx},
                   {"exp_abs_x", r.moments.exp_abs_x}};
  if (r.ine1_checked) {
    const auto& c = r.ine1;
    j["ine1"] = {{"lower", c.lower},
                 {"upper", c.upper},
                 {"slack_lower", c.slack_lower},
                 {"slack_upper", c.slack_upper},
                 {"slack_triangle_n", c.slack_triangle_n},
                 {"slack_triangle_s1", c.slack_triangle_s1},
                 {"allowance", c.allowance},
                 {"bracket_ok", c.bracket_ok},
                 {"triangles_ok", c.triangles_ok}};
  }
  j["self_energy_bracket"] = bracket_json(r.bracket, r.bracket_ok);
  j["completed_square_bracket"] = bracket_json(r.floor_bracket, r.floor_ok);
  j["bracket_tol"] = r.bracket_tol;
  j["x2_bound_ok"] = r.x2_bound_ok;
  if (r.localization) {
    const auto& l = *r.localization;
    j["localization"] = {{"c0", l.c0},
                         {"n0", l.n0},
                         {"atomic_energy", l.atomic_energy},
                         {"sup_outside", l.sup_outside},
                         {"margin", l.margin},
                         {"exp_moment", l.moments.exp_abs_x},
                         {"finite", l.finite}};
  } else if (!r.localization_error.empty()) {
    j["localization"] = {{"error", r.localization_error}};
  }
  j["checks_ok"] = r.checks_ok();
  return j;
}

json constants_json(const ircheck::ConstantsReport& c) {
  json j = {{"q", c.q},
            {"lambda", c.lambda},
            {"feasible", c.feasible}};
  if (c.feasible) {
    j["eps"] = c.eps;
    j["eps_prime"] = c.eps_prime;
    j["c_relative"] = c.c_relative;
    j["c_absolute"] = c.c_absolute;
    j["cq"] = c.cq;
  }
  if (c.c12) {
    j["c1"] = c.c12->first;
    j["c2"] = c.c12->second;
  }
  if (c.has_bound()) j["x2_bound"] = c.x2_bound;
  return j;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_sweep_csv(std::ostream& out, const ircheck::SweepReport& rep) {
  out << "kappa,E,N_expect,N_sum_a,S1,S2,x2,dx,pt_resid_max,tail_weight,ine1_lower,ine1_upper,slack_lower,slack_upper\n";
  for (const auto& r : rep.records) {
    if (!r.solved) continue;
    const double fields[] = {r.kappa, r.energy, r.n_expect, r.n_sum_a, r.s1, r.s2,
                             r.moments.x2, r.moments.dx, r.pt_resid_max, r.tail_weight,
                             r.ine1.lower, r.ine1.upper, r.ine1.slack_lower, r.ine1.slack_upper};
    bool first = true;
    for (double v : fields) {
      if (!first) out << ',';
      first = false;
      out << format_double(v);
    }
    out << '\n';
  }
}

json sweep_summary(const RunConfig& cfg, const ircheck::SweepReport& rep,
                   const std::vector<ircheck::BindingReport>& binding) {
  json config = config_to_json(cfg);
  // Where results go and how they are scheduled does not change them.
  config.erase("output");

  json j;
  j["config"] = config;
  j["kind"] = rep.kind == model::ModelKind::coupled ? "coupled" : "van_hove";
  j["atomic_energies"] = rep.atomic_energies;
  json points = json::array();
  for (const auto& r : rep.records) points.push_back(record_json(r));
  j["points"] = points;

  const double pi2 = std::numbers::pi * std::numbers::pi;
  j["fit"] = {{"slope", rep.fit.slope}, {"intercept", rep.fit.intercept}, {"points", rep.fit.points}};
  j["slope_bracket"] = {{"low", rep.bracket_low},
                        {"high", rep.bracket_high},
                        {"margin", rep.slope_margin},
                        {"inside", rep.slope_in_bracket}};
  const double center = rep.q * rep.q / (4.0 * pi2);
  j["slope_center"] = {{"value", center},
                       {"relative_error", center != 0.0 ? std::abs(rep.fit.slope - center) / center : 0.0}};
  j["sup_x2"] = rep.sup_x2;
  j["monotone_growth"] = rep.monotone_growth;
  if (rep.constants) j["constants"] = constants_json(*rep.constants);

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  bool any_localization = false;
  for (const auto& r : rep.records) {
    if (!r.accepted || !r.localization) continue;
    any_localization = true;
    lo = std::min(lo, r.localization->moments.exp_abs_x);
    hi = std::max(hi, r.localization->moments.exp_abs_x);
  }
  if (any_localization) j["exp_moment_range"] = {{"min", lo}, {"max", hi}, {"ratio", hi / lo}};

  bool binding_ok = true;
  if (!binding.empty()) {
    json b = json::array();
    for (const auto& r : binding) {
      b.push_back({{"kappa", r.kappa},
                   {"energy", r.energy},
                   {"energy_free", r.energy_free},
                   {"binding", r.binding},
                   {"atomic_energy", r.atomic_energy},
                   {"free_offset", r.free_offset},
                   {"tolerance", r.tolerance},
                   {"margin", r.margin},
                   {"ok", r.ok}});
      binding_ok = binding_ok && r.ok;
    }
    j["binding"] = b;
  }

  bool literal_bracket = true;
  for (const auto& r : rep.records) {
    if (r.accepted) literal_bracket = literal_bracket && r.bracket_ok;
  }
  j["verdicts"] = {{"points", rep.records.size()},
                   {"solved", rep.solved()},
                   {"accepted", rep.accepted()},
                   {"theorems_ok", rep.theorems_ok() && binding_ok},
                   {"self_energy_bracket_literal_ok", literal_bracket}};
  return j;
}

std::string dump_json(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

}  // namespace nelson::cli
