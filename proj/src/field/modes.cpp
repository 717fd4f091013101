#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "nelson/errors.hpp"
#include "nelson/field.hpp"
#include "nelson/hash.hpp"

namespace nelson::field {

std::string to_string(Spacing s) { return s == Spacing::log ? "log" : "linear"; }

Spacing spacing_from_string(const std::string& s) {
  if (s == "log") return Spacing::log;
  if (s == "linear") return Spacing::linear;
  throw Error("unknown shell spacing '" + s + "' (expected log or linear)");
}

double Mode::norm_k() const { return std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]); }

double Mode::coupling() const { return amp * std::sqrt(weight); }

double ModeSet::total_weight() const {
  double sum = 0.0;
  for (const auto& m : modes) sum += m.weight;
  return sum;
}

double ModeSet::coupling_moment(int omega_power) const {
  double sum = 0.0;
  for (const auto& m : modes) {
    const double g = m.coupling();
    sum += g * g / std::pow(m.omega, omega_power);
  }
  return sum;
}

double ModeSet::min_frequency() const {
  double w = std::numeric_limits<double>::infinity();
  for (const auto& m : modes) w = std::min(w, m.omega);
  return w;
}

namespace {

std::uint64_t hash_modes(const ModeParams& p, const std::vector<Mode>& modes) {
  ContentHash h;
  h.add("modes").add(p.kappa).add(p.lambda).add(p.shells).add(p.directions);
  h.add(to_string(p.spacing)).add(static_cast<int>(p.generalized)).add(p.mu).add(p.nu);
  for (const auto& m : modes) {
    h.add(m.k[0]).add(m.k[1]).add(m.k[2]).add(m.omega).add(m.weight).add(m.amp);
  }
  return h.value();
}

}  // namespace

ModeSet ModeSet::from_modes(std::vector<Mode> modes) {
  ModeSet set;
  double kmin = std::numeric_limits<double>::infinity();
  double kmax = 0.0;
  for (const auto& m : modes) {
    if (!(m.omega > 0.0) || !(m.weight >= 0.0) || !std::isfinite(m.amp)) {
      throw Error("hand-built mode needs omega > 0, weight >= 0 and finite amp");
    }
    kmin = std::min(kmin, m.norm_k());
    kmax = std::max(kmax, m.norm_k());
  }
  set.params.kappa = modes.empty() ? 0.0 : kmin;
  set.params.lambda = kmax;
  set.params.shells = static_cast<int>(modes.size());
  set.params.directions = 1;
  set.modes = std::move(modes);
  set.hash = hash_modes(set.params, set.modes);
  return set;
}

double shell_volume(double inner, double outer) {
  return 4.0 * std::numbers::pi * (outer * outer * outer - inner * inner * inner) / 3.0;
}

std::vector<std::array<double, 3>> direction_set(int directions) {
  switch (directions) {
    case 1:
      return {{0.0, 0.0, 1.0}};
    case 6:
      return {{1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}, {0.0, 1.0, 0.0},
              {0.0, -1.0, 0.0}, {0.0, 0.0, 1.0}, {0.0, 0.0, -1.0}};
    case 12: {
      const double phi = std::numbers::phi;
      const double s = 1.0 / std::sqrt(1.0 + phi * phi);
      std::vector<std::array<double, 3>> dirs;
      for (double a : {1.0, -1.0}) {
        for (double b : {1.0, -1.0}) {
          dirs.push_back({0.0, a * s, b * phi * s});
          dirs.push_back({a * s, b * phi * s, 0.0});
          dirs.push_back({b * phi * s, 0.0, a * s});
        }
      }
      return dirs;
    }
    default:
      throw Error("directions must be 1, 6 or 12");
  }
}

ModeSet build_modes(const ModeParams& p) {
  if (!(p.kappa > 0.0)) {
    throw CutoffOrderError("infrared cutoff must be positive (kappa=0 is only approached by sweeps)");
  }
  if (!(p.kappa < p.lambda) || !std::isfinite(p.lambda)) {
    throw CutoffOrderError("need kappa < Lambda, got kappa=" + std::to_string(p.kappa) +
                           " Lambda=" + std::to_string(p.lambda));
  }
  if (p.shells < 1) throw Error("need at least one shell");
  if (p.generalized && !(p.mu >= 0.0)) throw Error("dispersion exponent mu must be >= 0");
  const auto dirs = direction_set(p.directions);

  std::vector<double> edges(static_cast<std::size_t>(p.shells) + 1);
  for (int s = 0; s <= p.shells; ++s) {
    const double t = static_cast<double>(s) / p.shells;
    edges[static_cast<std::size_t>(s)] = p.spacing == Spacing::log
                                             ? p.kappa * std::pow(p.lambda / p.kappa, t)
                                             : p.kappa + (p.lambda - p.kappa) * t;
  }
  edges.front() = p.kappa;
  edges.back() = p.lambda;

  const double norm = std::pow(2.0 * std::numbers::pi, -1.5);
  ModeSet set;
  set.params = p;
  set.modes.reserve(static_cast<std::size_t>(p.shells) * dirs.size());
  for (int s = 0; s < p.shells; ++s) {
    const double r0 = edges[static_cast<std::size_t>(s)];
    const double r1 = edges[static_cast<std::size_t>(s) + 1];
    const double r = p.spacing == Spacing::log ? std::sqrt(r0 * r1) : 0.5 * (r0 + r1);
    const double w = shell_volume(r0, r1) / static_cast<double>(dirs.size());
    const double omega = p.generalized ? std::pow(r, p.mu) : r;
    const double amp = p.generalized ? norm * std::pow(r, -p.nu) : norm / std::sqrt(2.0 * r);
    for (const auto& d : dirs) {
      set.modes.push_back(Mode{{r * d[0], r * d[1], r * d[2]}, omega, w, amp});
    }
  }
  set.hash = hash_modes(set.params, set.modes);
  return set;
}

void write_csv(const ModeSet& modes, std::ostream& out) {
  out << "kx,ky,kz,omega,weight,amp\n";
  char line[256];
  for (const auto& m : modes.modes) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", m.k[0], m.k[1],
                  m.k[2], m.omega, m.weight, m.amp);
    out << line;
  }
}

}  // namespace nelson::field
