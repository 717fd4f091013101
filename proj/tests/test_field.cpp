#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "nelson/errors.hpp"
#include "nelson/field.hpp"
#include "oracles.hpp"

using namespace nelson;
using namespace nelson::field;

namespace {

std::vector<int> tuple(const FockSpace& fs, std::size_t i) {
  const auto c = fs.config(i);
  return {c.begin(), c.end()};
}

ModeParams nelson_params(double kappa, double lambda, int shells, Spacing spacing = Spacing::log) {
  ModeParams p;
  p.kappa = kappa;
  p.lambda = lambda;
  p.shells = shells;
  p.spacing = spacing;
  return p;
}

// Relative error of sum_j w_j f(|k_j|) against the exact radial integral.
double quadrature_error(int shells, double (*f)(double), double exact) {
  const ModeSet m = build_modes(nelson_params(0.1, 1.0, shells));
  double sum = 0.0;
  for (const auto& mode : m.modes) sum += mode.weight * f(mode.norm_k());
  return std::abs(sum - exact) / exact;
}

}  // namespace

TEST_SUITE("field") {

TEST_CASE("Fock enumeration examples") {
  CHECK(enumerate_fock(1, 3, 3).dim() == 4);
  CHECK(enumerate_fock(4, 1, 2).dim() == 11);

  const FockSpace fs = enumerate_fock(2, 2, 2);
  REQUIRE(fs.dim() == 6);
  const std::vector<std::vector<int>> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  for (std::size_t i = 0; i < 6; ++i) CHECK(tuple(fs, i) == expected[i]);
}

TEST_CASE("dimension matches the generating function and the index map is a bijection") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> k(1, 6), cap(1, 4), tot(1, 6);
  for (int trial = 0; trial < 20; ++trial) {
    const int modes = k(rng), n = cap(rng), total = tot(rng);
    const FockSpace fs(modes, n, total);
    CHECK(fs.dim() == oracle::generating_count(modes, n, total));
    CHECK(FockSpace::count(modes, n, total) == fs.dim());
    std::set<std::vector<int>> seen;
    for (std::size_t i = 0; i < fs.dim(); ++i) {
      const auto t = tuple(fs, i);
      CHECK(fs.index_of(t) == static_cast<std::int64_t>(i));
      seen.insert(t);
    }
    CHECK(seen.size() == fs.dim());
    CHECK(fs.total(0) == 0);
  }
  const std::vector<int> outside{5, 0};
  CHECK(FockSpace(2, 2, 3).index_of(outside) == -1);
}

TEST_CASE("capacity limit") {
  CHECK_THROWS_AS(FockSpace(30, 5, 5, 1000), CapacityError);
}

TEST_CASE("ladder operators") {
  const FockSpace one(1, 4, 4);
  StateVector two = StateVector::Zero(one.dim());
  two(2) = 1.0;
  const StateVector lowered = apply_annihilation(0, two, one);
  CHECK(std::abs(lowered(1) - std::sqrt(2.0)) <= 1e-15);
  CHECK(std::abs(lowered.norm() - std::sqrt(2.0)) <= 1e-15);

  const FockSpace fs(3, 3, 4);
  StateVector vac = StateVector::Zero(fs.dim());
  vac(0) = 1.0;
  for (std::size_t j = 0; j < 3; ++j) CHECK(apply_annihilation(j, vac, fs).norm() == 0.0);

  StateVector e110 = StateVector::Zero(fs.dim());
  const std::vector<int> c110{1, 1, 0};
  e110(fs.index_of(c110)) = 1.0;
  CHECK((apply_number(e110, fs) - 2.0 * e110).norm() == 0.0);
}

TEST_CASE("number operator, adjointness and truncated commutators on random vectors") {
  std::mt19937_64 rng(17);
  const FockSpace fs(4, 3, 5);
  for (int trial = 0; trial < 5; ++trial) {
    const StateVector u = oracle::random_state(fs.dim(), rng);
    const StateVector v = oracle::random_state(fs.dim(), rng);

    double direct = 0.0;
    for (std::size_t i = 0; i < fs.dim(); ++i) direct += fs.total(i) * std::norm(v(i));
    double ladder = 0.0;
    for (std::size_t j = 0; j < 4; ++j) ladder += apply_annihilation(j, v, fs).squaredNorm();
    CHECK(std::abs(v.dot(apply_number(v, fs)).real() - direct) <= 1e-12 * direct);
    CHECK(std::abs(ladder - direct) <= 1e-12 * direct);

    for (std::size_t j = 0; j < 4; ++j) {
      double per_mode = 0.0;
      for (std::size_t i = 0; i < fs.dim(); ++i) per_mode += fs.occupation(i, j) * std::norm(v(i));
      const double ata = v.dot(apply_creation(j, apply_annihilation(j, v, fs), fs)).real();
      CHECK(std::abs(ata - per_mode) <= 1e-12 * std::max(1.0, per_mode));

      const auto lhs = apply_creation(j, u, fs).dot(v);
      const auto rhs = u.dot(apply_annihilation(j, v, fs));
      CHECK(std::abs(lhs - rhs) <= 1e-13 * u.norm() * v.norm());
    }

    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        const StateVector aa = apply_annihilation(i, apply_annihilation(j, v, fs), fs) -
                               apply_annihilation(j, apply_annihilation(i, v, fs), fs);
        CHECK(aa.norm() <= 1e-14 * v.norm());
        const StateVector cc = apply_creation(i, apply_creation(j, v, fs), fs) -
                               apply_creation(j, apply_creation(i, v, fs), fs);
        CHECK(cc.norm() <= 1e-14 * v.norm());
        // [a_i, a_j^dagger] = delta_ij on configurations strictly below both caps.
        const StateVector comm = apply_annihilation(i, apply_creation(j, v, fs), fs) -
                                 apply_creation(j, apply_annihilation(i, v, fs), fs);
        for (std::size_t c = 0; c < fs.dim(); ++c) {
          if (fs.total(c) >= fs.total_max() - 1 || fs.occupation(c, i) >= fs.n_max() ||
              fs.occupation(c, j) >= fs.n_max()) {
            continue;
          }
          const std::complex<double> expected = i == j ? v(c) : 0.0;
          CHECK(std::abs(comm(c) - expected) <= 1e-13 * v.norm());
        }
      }
    }
  }
}

TEST_CASE("mode weights partition the shell") {
  for (int dirs : {1, 6, 12}) {
    for (Spacing sp : {Spacing::log, Spacing::linear}) {
      ModeParams p = nelson_params(0.05, 1.0, 17, sp);
      p.directions = dirs;
      const ModeSet m = build_modes(p);
      CHECK(m.size() == static_cast<std::size_t>(17 * dirs));
      const double volume = shell_volume(0.05, 1.0);
      CHECK(std::abs(m.total_weight() - volume) <= 1e-12 * volume);
      for (const auto& mode : m.modes) {
        CHECK(mode.norm_k() >= 0.05 * (1 - 1e-15));
        CHECK(mode.norm_k() <= 1.0 * (1 + 1e-15));
        CHECK(mode.omega > 0.0);
      }
    }
  }
}

TEST_CASE("direction sets are unit vectors that sum to zero") {
  for (int dirs : {6, 12}) {
    const auto d = direction_set(dirs);
    CHECK(d.size() == static_cast<std::size_t>(dirs));
    std::array<double, 3> sum{};
    for (const auto& v : d) {
      CHECK(std::abs(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] - 1.0) <= 1e-15);
      for (int i = 0; i < 3; ++i) sum[i] += v[i];
    }
    for (double s : sum) CHECK(std::abs(s) <= 1e-14);
  }
  CHECK_THROWS(direction_set(4));
}

TEST_CASE("cutoff order is enforced") {
  CHECK_THROWS_AS(build_modes(nelson_params(1.0, 1.0, 4)), CutoffOrderError);
  CHECK_THROWS_AS(build_modes(nelson_params(2.0, 1.0, 4)), CutoffOrderError);
  CHECK_THROWS_AS(build_modes(nelson_params(0.0, 1.0, 4)), CutoffOrderError);
}

TEST_CASE("a vanishing shell carries vanishing weight") {
  const ModeSet m = build_modes(nelson_params(1.0 - 1e-9, 1.0, 1));
  CHECK(m.total_weight() <= 1e-7);
}

TEST_CASE("coupling moments reproduce the shell integrals") {
  const double pi = std::numbers::pi;
  const ModeSet m = build_modes(nelson_params(0.1, 1.0, 32));
  const double sum_g2 = m.coupling_moment(0);
  const double sum_g2_w2 = m.coupling_moment(2);
  // integral over the shell of (2 pi)^-3 / (2|k|) and (2 pi)^-3 / (2 |k|^3)
  const double exact0 = (1.0 - 0.01) / (8.0 * pi * pi);
  const double exact2 = std::log(10.0) / (4.0 * pi * pi);
  CHECK(std::abs(sum_g2 - exact0) <= 0.02 * exact0);
  CHECK(std::abs(sum_g2_w2 - exact2) <= 0.02 * exact2);
  CHECK(exact2 == doctest::Approx(0.058327).epsilon(1e-5));
}

TEST_CASE("radial quadrature converges at second order") {
  const double pi = std::numbers::pi;
  const double a = 0.1, b = 1.0;
  struct Case {
    double (*f)(double);
    double exact;
  };
  const Case cases[] = {
      {[](double r) { return r; }, pi * (b * b * b * b - a * a * a * a)},
      {[](double r) { return 1.0 / r; }, 2.0 * pi * (b * b - a * a)},
      {[](double r) { return 1.0 / (r * r * r); }, 4.0 * pi * std::log(b / a)},
  };
  for (const auto& c : cases) {
    const double e16 = quadrature_error(16, c.f, c.exact);
    const double e32 = quadrature_error(32, c.f, c.exact);
    const double e64 = quadrature_error(64, c.f, c.exact);
    CHECK(e32 <= 0.3 * e16);
    CHECK(e64 <= 0.3 * e32);
    CHECK(e64 * 64 * 64 <= 1.1 * e16 * 16 * 16);
  }
  CHECK(quadrature_error(16, [](double) { return 1.0; }, 4.0 * pi * (b * b * b - a * a * a) / 3.0) <= 1e-14);
}

TEST_CASE("generalized profile") {
  ModeParams p = nelson_params(0.1, 1.0, 4);
  p.generalized = true;
  p.mu = 2.0;
  p.nu = 0.25;
  const ModeSet m = build_modes(p);
  for (const auto& mode : m.modes) {
    const double r = mode.norm_k();
    CHECK(mode.omega == doctest::Approx(r * r));
    CHECK(mode.amp == doctest::Approx(std::pow(2.0 * std::numbers::pi, -1.5) * std::pow(r, -0.25)));
  }
  const ModeSet d = build_modes(nelson_params(0.1, 1.0, 4));
  for (const auto& mode : d.modes) {
    CHECK(mode.amp == doctest::Approx(std::pow(2.0 * std::numbers::pi, -1.5) / std::sqrt(2.0 * mode.norm_k())));
  }
}

TEST_CASE("mode CSV export") {
  std::ostringstream out;
  write_csv(build_modes(nelson_params(0.1, 1.0, 3)), out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "kx,ky,kz,omega,weight,amp");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}

}  // TEST_SUITE
