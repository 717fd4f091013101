#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nelson/errors.hpp"
#include "nelson/ircheck.hpp"

namespace nelson::ircheck {

Ine1Check check_ine1(double n_expect, double s1, double s2, double x2, double residual_sum_squares,
                     double q, double kappa, double lambda) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double q2 = q * q;
  const double log_ratio = std::log(lambda / kappa);
  const double offset = lambda * lambda * x2;

  Ine1Check c;
  c.lower = q2 / (8.0 * pi2) * (log_ratio - offset);
  c.upper = q2 / (2.0 * pi2) * log_ratio + q2 * offset / (4.0 * pi2);
  c.slack_lower = n_expect - c.lower;
  c.slack_upper = c.upper - n_expect;
  c.slack_triangle_n = 2.0 * s1 + 2.0 * s2 - n_expect;
  c.slack_triangle_s1 = 2.0 * n_expect + 2.0 * s2 - s1;
  c.allowance = 4.0 * residual_sum_squares;
  const double floor = -(c.allowance + kRoundoff);
  c.bracket_ok = c.slack_lower >= floor && c.slack_upper >= floor;
  c.triangles_ok = c.slack_triangle_n >= floor && c.slack_triangle_s1 >= floor;
  return c;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("least_squares: size mismatch");
  LinearFit fit;
  fit.points = x.size();
  if (x.size() < 2) return fit;
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error("least_squares: abscissae are all equal");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

bool IrRecord::checks_ok() const {
  if (!accepted) return true;
  // The literal self-energy bracket is reported but not enforced: its lower
  // end sits above the exact frozen-particle energy whenever omega < 1.
  bool ok = number_identity_error <= 1e-10 && floor_ok && s2_cap_ok && x2_bound_ok;
  if (ine1_checked) ok = ok && ine1.bracket_ok && ine1.triangles_ok;
  if (localization) ok = ok && localization->finite;
  return ok;
}

std::size_t SweepReport::solved() const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const IrRecord& r) { return r.solved; }));
}

std::size_t SweepReport::accepted() const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const IrRecord& r) { return r.accepted; }));
}

bool SweepReport::theorems_ok() const {
  for (const auto& r : records) {
    if (!r.checks_ok()) return false;
  }
  if (kind == model::ModelKind::van_hove && fit.points >= 2) return slope_in_bracket;
  return true;
}

void validate_kappas(std::span<const double> kappas, double lambda) {
  if (kappas.empty()) throw ConfigError("kappas", "need at least one infrared cutoff");
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    const std::string path = "kappas[" + std::to_string(i) + "]";
    if (!std::isfinite(kappas[i]) || kappas[i] <= 0.0) throw ConfigError(path, "must be positive");
    if (kappas[i] >= lambda) {
      throw ConfigError(path, "kappa " + std::to_string(kappas[i]) + " must be below Lambda " + std::to_string(lambda));
    }
    if (i > 0 && !(kappas[i] < kappas[i - 1])) throw ConfigError(path, "kappas must be strictly decreasing");
  }
}

}  // namespace nelson::ircheck
