#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>
#include <string>

#include "nelson/atomic.hpp"
#include "nelson/errors.hpp"

namespace nelson::atomic {

std::string to_string(PotentialClass cls) {
  switch (cls) {
    case PotentialClass::c1:
      return "C1";
    case PotentialClass::c2:
      return "C2";
    case PotentialClass::unclassified:
      break;
  }
  return "unclassified";
}

// ---------------------------------------------------------------- grid

void GridSpec::validate() const {
  if (dim != 1 && dim != 3) throw InvalidGridError("grid.dim must be 1 or 3");
  if (!(half_extent > 0.0) || !std::isfinite(half_extent)) {
    throw InvalidGridError("grid.half_extent must be positive and finite");
  }
  if (points < 9) throw InvalidGridError("grid.points must be >= 9");
  if (points % 2 == 0) throw InvalidGridError("grid.points must be odd");
  // Indices are stored as 32-bit in the sparse operator.
  const double nodes = std::pow(static_cast<double>(points), dim);
  if (nodes > static_cast<double>(std::numeric_limits<int>::max())) {
    throw InvalidGridError("grid has more nodes than the index type can hold");
  }
}

double GridSpec::cell_volume() const { return std::pow(spacing(), dim); }

std::size_t GridSpec::unknowns() const {
  std::size_t m = interior_per_axis();
  return dim == 1 ? m : m * m * m;
}

std::size_t GridSpec::total_nodes() const {
  const auto n = static_cast<std::size_t>(points);
  return dim == 1 ? n : n * n * n;
}

Position GridSpec::position(std::size_t u) const {
  const std::size_t m = interior_per_axis();
  const double h = spacing();
  auto coord = [&](std::size_t i) { return -half_extent + h * static_cast<double>(i + 1); };
  if (dim == 1) return {0.0, 0.0, coord(u)};
  return {coord(u % m), coord((u / m) % m), coord(u / (m * m))};
}

std::size_t GridSpec::lattice_index(std::size_t u) const {
  const std::size_t m = interior_per_axis();
  const auto n = static_cast<std::size_t>(points);
  if (dim == 1) return u + 1;
  return (u % m + 1) + n * ((u / m) % m + 1) + n * n * (u / (m * m) + 1);
}

void GridSpec::hash_into(ContentHash& h) const {
  h.add("grid").add(dim).add(half_extent).add(points);
}

// ---------------------------------------------------------------- potential

PotentialSpec PotentialSpec::harmonic(double omega0) {
  return {Harmonic{omega0}, PotentialClass::c1, std::nullopt};
}

PotentialSpec PotentialSpec::gaussian_well(double depth, double width) {
  return {GaussianWell{depth, width}, PotentialClass::c2, std::nullopt};
}

PotentialSpec PotentialSpec::tabulated(std::vector<double> values, PotentialClass cls,
                                       std::optional<std::pair<double, double>> c12) {
  return {Tabulated{std::move(values)}, cls, c12};
}

PotentialSpec PotentialSpec::free() { return {Free{}, PotentialClass::unclassified, std::nullopt}; }

void PotentialSpec::validate() const {
  if (const auto* h = std::get_if<Harmonic>(&kind)) {
    if (!(h->omega0 > 0.0) || !std::isfinite(h->omega0)) {
      throw InvalidPotentialError("harmonic omega0 must be positive");
    }
    if (declared_class != PotentialClass::c1) {
      throw InvalidPotentialError("harmonic potential must be declared C1");
    }
  } else if (const auto* g = std::get_if<GaussianWell>(&kind)) {
    if (!(g->depth > 0.0) || !std::isfinite(g->depth)) {
      throw InvalidPotentialError("gaussian_well depth must be positive");
    }
    if (!(g->width > 0.0) || !std::isfinite(g->width)) {
      throw InvalidPotentialError("gaussian_well width must be positive");
    }
    if (declared_class != PotentialClass::c2) {
      throw InvalidPotentialError("gaussian_well potential must be declared C2");
    }
  } else if (std::holds_alternative<Tabulated>(kind)) {
    if (declared_class == PotentialClass::c1 && !c1_constants_override) {
      throw InvalidPotentialError("tabulated C1 potential needs (c1, c2)");
    }
  }
  if (c1_constants_override) {
    auto [c1, c2] = *c1_constants_override;
    if (!(c1 > 0.0) || !(c2 >= 0.0)) throw InvalidPotentialError("c1 must be > 0 and c2 >= 0");
  }
}

std::string PotentialSpec::name() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Harmonic>) return "harmonic";
        if constexpr (std::is_same_v<K, GaussianWell>) return "gaussian_well";
        if constexpr (std::is_same_v<K, Tabulated>) return "tabulated";
        return "free";
      },
      kind);
}

double PotentialSpec::at(const GridSpec& grid, std::size_t u) const {
  if (const auto* t = std::get_if<Tabulated>(&kind)) {
    const std::size_t idx = grid.lattice_index(u);
    if (t->values.size() != grid.total_nodes()) {
      throw InvalidPotentialError("tabulated potential has " + std::to_string(t->values.size()) +
                                  " values, grid has " + std::to_string(grid.total_nodes()) +
                                  " nodes");
    }
    return t->values[idx];
  }
  const Position x = grid.position(u);
  const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
  if (const auto* h = std::get_if<Harmonic>(&kind)) return 0.5 * h->omega0 * h->omega0 * r2;
  if (const auto* g = std::get_if<GaussianWell>(&kind)) {
    return -g->depth * std::exp(-r2 / (2.0 * g->width * g->width));
  }
  return 0.0;
}

std::pair<double, double> PotentialSpec::c1_constants() const {
  if (declared_class != PotentialClass::c1) {
    throw UnsupportedError("c1 constants requested for a non-C1 potential");
  }
  if (c1_constants_override) return *c1_constants_override;
  if (const auto* h = std::get_if<Harmonic>(&kind)) {
    return {2.0 / (h->omega0 * h->omega0), 0.0};
  }
  throw InvalidPotentialError("no (c1, c2) available for " + name());
}

void PotentialSpec::hash_into(ContentHash& h) const {
  h.add("potential").add(name()).add(static_cast<int>(declared_class));
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Harmonic>) h.add(k.omega0);
        if constexpr (std::is_same_v<K, GaussianWell>) h.add(k.depth).add(k.width);
        if constexpr (std::is_same_v<K, Tabulated>) h.add(std::span<const double>(k.values));
      },
      kind);
  if (c1_constants_override) h.add(c1_constants_override->first).add(c1_constants_override->second);
}

PotentialSpec read_potential_table(std::istream& in, const GridSpec& grid, PotentialClass cls,
                                   std::optional<std::pair<double, double>> c12) {
  grid.validate();
  const std::size_t nodes = grid.total_nodes();
  std::vector<double> values(nodes, std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> seen(nodes, false);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long long index = 0;
    double value = 0.0;
    if (!(fields >> index)) continue;  // blank line
    if (!(fields >> value)) {
      throw InvalidPotentialError("potential table line " + std::to_string(line_no) +
                                  ": expected 'index value'");
    }
    if (index < 0 || static_cast<std::size_t>(index) >= nodes) {
      throw InvalidPotentialError("potential table line " + std::to_string(line_no) +
                                  ": node index out of range");
    }
    values[static_cast<std::size_t>(index)] = value;
    seen[static_cast<std::size_t>(index)] = true;
  }
  for (std::size_t u = 0; u < grid.unknowns(); ++u) {
    if (!seen[grid.lattice_index(u)]) {
      throw InvalidPotentialError("potential table misses interior node " +
                                  std::to_string(grid.lattice_index(u)));
    }
  }
  // Boundary nodes are never read; give them a finite placeholder.
  for (std::size_t i = 0; i < nodes; ++i) {
    if (!seen[i]) values[i] = 0.0;
  }
  auto spec = PotentialSpec::tabulated(std::move(values), cls, c12);
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------- class checks

ClassReport validate_class(const PotentialSpec& potential, const AtomicBasis& basis) {
  const GridSpec& grid = basis.grid;
  ClassReport report;
  report.cls = potential.declared_class;
  report.ground_energy = basis.ground_energy();

  const Eigen::VectorXd ground = basis.orbitals.col(0);
  const double peak = ground.cwiseAbs().maxCoeff();
  report.min_ground_component = ground.minCoeff() / peak;
  report.negative_nodes = static_cast<std::size_t>((ground.array() < 0.0).count());

  if (potential.declared_class == PotentialClass::c1) {
    const auto [c1, c2] = potential.c1_constants();
    report.c1 = c1;
    report.c2 = c2;
    double worst = 0.0;
    std::size_t worst_node = 0;
    for (std::size_t u = 0; u < grid.unknowns(); ++u) {
      const Position x = grid.position(u);
      const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
      const double rhs = c1 * potential.at(grid, u) + c2;
      const double excess = r2 - rhs;
      if (excess > 1e-12 * std::max(1.0, std::abs(rhs)) && excess > worst) {
        worst = excess;
        worst_node = grid.lattice_index(u);
      }
    }
    if (worst > 0.0) {
      throw ClassViolationError("C1 inequality |x|^2 <= c1 V + c2 fails by " +
                                    std::to_string(worst) + " at node " +
                                    std::to_string(worst_node),
                                worst_node);
    }
  } else if (potential.declared_class == PotentialClass::c2) {
    if (!(basis.ground_energy() < 0.0)) {
      // Deepest node is the natural witness for a well too shallow to bind.
      std::size_t deepest = 0;
      double vmin = std::numeric_limits<double>::infinity();
      for (std::size_t u = 0; u < grid.unknowns(); ++u) {
        const double v = potential.at(grid, u);
        if (v < vmin) {
          vmin = v;
          deepest = grid.lattice_index(u);
        }
      }
      throw ClassViolationError("C2 requires a negative ground energy, got " +
                                    std::to_string(basis.ground_energy()),
                                deepest);
    }
    for (double frac : {0.25, 0.5, 0.75}) report.decay_radii.push_back(frac * grid.half_extent);
    report.decay_sup.assign(report.decay_radii.size(), 0.0);
    std::vector<std::size_t> witness(report.decay_radii.size(), 0);
    for (std::size_t u = 0; u < grid.unknowns(); ++u) {
      const Position x = grid.position(u);
      const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      const double v = std::abs(potential.at(grid, u));
      for (std::size_t i = 0; i < report.decay_radii.size(); ++i) {
        if (r > report.decay_radii[i] && v > report.decay_sup[i]) {
          report.decay_sup[i] = v;
          witness[i] = grid.lattice_index(u);
        }
      }
    }
    for (std::size_t i = 1; i < report.decay_sup.size(); ++i) {
      if (report.decay_sup[i] > report.decay_sup[i - 1]) {
        throw ClassViolationError("C2 requires |V| to decay, sup grows past R=" +
                                      std::to_string(report.decay_radii[i]),
                                  witness[i]);
      }
    }
    if (report.decay_sup.back() >= std::abs(basis.ground_energy())) {
      throw ClassViolationError("C2 tail sup|V| beyond R=" +
                                    std::to_string(report.decay_radii.back()) +
                                    " is not below |E_at|",
                                witness.back());
    }
  }
  return report;
}

}  // namespace nelson::atomic
