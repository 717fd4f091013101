#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library, so agreement is a genuine cross-check.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

// Dense -1/2 d^2/dz^2 + V on the interior nodes of [-L, L] with n points.
inline Eigen::VectorXd dense_fd_spectrum_1d(const std::function<double(double)>& v, double half_extent,
                                            int points) {
  const int m = points - 2;
  const double h = 2.0 * half_extent / (points - 1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const double z = -half_extent + (i + 1) * h;
    a(i, i) = 1.0 / (h * h) + v(z);
    if (i + 1 < m) a(i, i + 1) = a(i + 1, i) = -0.5 / (h * h);
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a, Eigen::EigenvaluesOnly).eigenvalues();
}

// Lowest eigenvalue of the discrete Dirichlet Laplacian term: (2/h^2) sin^2(pi / (2 (n-1))).
inline double free_box_ground_1d(double half_extent, int points) {
  const double h = 2.0 * half_extent / (points - 1);
  const double s = std::sin(pi / (2.0 * (points - 1)));
  return 2.0 * s * s / (h * h);
}

// Number of tuples (n_1..n_K), 0 <= n_j <= cap, sum <= total, from the
// coefficients of (1 + x + ... + x^cap)^K.
inline std::uint64_t generating_count(int modes, int cap, int total) {
  std::vector<std::uint64_t> poly(total + 1, 0);
  poly[0] = 1;
  for (int k = 0; k < modes; ++k) {
    std::vector<std::uint64_t> next(total + 1, 0);
    for (int s = 0; s <= total; ++s) {
      if (!poly[s]) continue;
      for (int c = 0; c <= cap && s + c <= total; ++c) next[s + c] += poly[s];
    }
    poly.swap(next);
  }
  std::uint64_t sum = 0;
  for (auto c : poly) sum += c;
  return sum;
}

inline Eigen::VectorXcd random_state(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = {g(rng), g(rng)};
  return v;
}

// Random Hermitian matrix with entries of order one.
inline Eigen::MatrixXcd random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
  return 0.5 * (a + a.adjoint());
}

}  // namespace oracle
