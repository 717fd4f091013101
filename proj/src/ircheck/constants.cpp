#include <cmath>
#include <numbers>

#include "nelson/errors.hpp"
#include "nelson/ircheck.hpp"

namespace nelson::ircheck {

double kato_rellich_relative(double lambda, double eps, double eps_prime) {
  return std::sqrt(lambda) / (2.0 * std::numbers::pi) * std::sqrt(2.0 * eps_prime * (2.0 + eps));
}

double kato_rellich_absolute(double lambda, double eps, double eps_prime) {
  return std::sqrt(lambda) / (2.0 * std::numbers::pi) *
         std::sqrt((2.0 + eps) / (2.0 * eps_prime) + 0.5 * (1.0 + 1.0 / (2.0 * eps)) * lambda);
}

ConstantsReport compute_cq(double q, double lambda, std::optional<std::pair<double, double>> c12) {
  if (!std::isfinite(q)) throw Error("compute_cq: q must be finite");
  if (!(lambda > 0.0)) throw CutoffOrderError("compute_cq: Lambda must be positive");

  constexpr int points = 60;
  auto grid_point = [](int i) { return std::pow(10.0, -3.0 + 6.0 * i / (points - 1)); };
  const double aq = std::abs(q);
  const double self_energy = q * q * lambda * lambda / (8.0 * std::numbers::pi * std::numbers::pi);

  ConstantsReport rep;
  rep.q = q;
  rep.lambda = lambda;
  rep.c12 = c12;
  for (int i = 0; i < points; ++i) {
    const double eps = grid_point(i);
    for (int k = 0; k < points; ++k) {
      const double eps_prime = grid_point(k);
      const double rel = kato_rellich_relative(lambda, eps, eps_prime);
      const double denominator = 1.0 - aq * rel;
      if (!(denominator > 0.0)) continue;
      const double abs = kato_rellich_absolute(lambda, eps, eps_prime);
      const double value = (1.0 + aq * abs + self_energy) / denominator;
      if (!rep.feasible || value < rep.cq) {
        rep.feasible = true;
        rep.cq = value;
        rep.eps = eps;
        rep.eps_prime = eps_prime;
        rep.c_relative = rel;
        rep.c_absolute = abs;
      }
    }
  }
  if (rep.feasible && c12) {
    const auto [c1, c2] = *c12;
    rep.x2_bound = c1 * rep.cq * rep.cq + c1 + c2;
  }
  return rep;
}

}  // namespace nelson::ircheck
