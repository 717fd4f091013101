#pragma once

// Thick-restart Lanczos for the lowest eigenpair of a Hermitian operator.
//
// Every new Krylov vector is orthogonalized twice against the whole basis
// (full reorthogonalization), so the projected matrix is formed explicitly
// and stays Hermitian to rounding. Vectors in `locked` are projected out of
// every iterate, which lets callers peel off eigenpairs one at a time. A
// Krylov space sees only one direction of a degenerate eigenspace, so each
// deflated call needs its own start vector to reach the rest of a multiplet.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "nelson/errors.hpp"

namespace nelson::spectral {

struct LanczosOptions {
  double tol = 1e-10;            // on ||A y - theta y|| for unit y
  std::size_t max_iter = 20000;  // operator applications
  std::size_t krylov_dim = 60;
  std::size_t keep = 20;         // Ritz vectors carried across a restart
};

template <class Scalar>
struct EigenPair {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  double value = 0.0;
  Vector vector;
  double residual = 0.0;
  std::size_t iterations = 0;
  // theta_1 - theta_0 of the last projected matrix; NaN if it had one row.
  double gap_estimate = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> residual_history;
};

namespace detail {

template <class Scalar>
double real_part(Scalar s) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return s;
  } else {
    return s.real();
  }
}

template <class Scalar>
Scalar conj(Scalar s) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return s;
  } else {
    return std::conj(s);
  }
}

}  // namespace detail

// `apply(in, out)` must write A*in into out (out is pre-sized).
template <class Scalar, class Apply>
EigenPair<Scalar> lowest_eigenpair(
    Apply&& apply, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& start,
    std::span<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> locked,
    const LanczosOptions& opt) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Index = Eigen::Index;

  const Index n = start.size();
  const Index available = n - static_cast<Index>(locked.size());
  if (available <= 0) {
    throw Error("lanczos: no space left after deflation");
  }

  auto deflate = [&](Vector& v) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : locked) v -= u * u.dot(v);
    }
  };

  const Index m = std::max<Index>(1, std::min<Index>(static_cast<Index>(opt.krylov_dim), available));
  const Index keep = std::clamp<Index>(static_cast<Index>(opt.keep), 1, std::max<Index>(1, m - 1));

  Matrix basis(n, m + 1);
  Matrix projected = Matrix::Zero(m, m);

  Vector v0 = start;
  deflate(v0);
  const double v0_norm = v0.norm();
  if (!(v0_norm > 0.0) || !std::isfinite(v0_norm)) {
    throw Error("lanczos: start vector vanishes after deflation");
  }
  basis.col(0) = v0 / v0_norm;

  EigenPair<Scalar> out;
  Vector w(n);
  Vector vj(n);
  double best = std::numeric_limits<double>::infinity();
  Index head = 0;  // Ritz vectors at the front of the basis after a restart

  // Deterministic pseudo-random direction orthogonal to `span` and the
  // locked vectors, written to `v`. False when nothing is left.
  std::uint64_t injections = 0;
  auto fresh_direction = [&](const auto& span, Vector& v) {
    std::uint64_t state = 0x9e3779b97f4a7c15ULL * (injections + 1);
    for (Index i = 0; i < n; ++i) {
      state = state * 6364136223846793005ULL + 1442695040888963407ULL;
      v(i) = Scalar(static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5);
    }
    for (int pass = 0; pass < 2; ++pass) {
      deflate(v);
      v.noalias() -= span * (span.adjoint() * v);
    }
    const double norm = v.norm();
    if (!(norm > 1e-8 * std::sqrt(static_cast<double>(n)))) return false;
    v /= norm;
    return true;
  };

  while (true) {
    Index extent = m;
    double beta = 0.0;
    bool invariant = false;
    bool fresh_tail = false;

    for (Index j = head; j < m; ++j) {
      vj = basis.col(j);
      apply(vj, w);
      ++out.iterations;
      const double applied_norm = w.norm();

      // Locked directions are the lowest ones, so any rounding leak into
      // them would be amplified; remove them in both passes.
      Vector h = Vector::Zero(j + 1);
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& u : locked) w -= u * u.dot(w);
        Vector c = basis.leftCols(j + 1).adjoint() * w;
        w.noalias() -= basis.leftCols(j + 1) * c;
        h += c;
      }

      for (Index i = 0; i < j; ++i) {
        projected(i, j) = h(i);
        projected(j, i) = detail::conj(h(i));
      }
      projected(j, j) = Scalar(detail::real_part(h(j)));

      beta = w.norm();
      const double scale = std::max(1.0, projected.topLeftCorner(j + 1, j + 1).cwiseAbs().maxCoeff());
      if (beta <= 64.0 * std::numeric_limits<double>::epsilon() * scale || beta <= 1e-12 * applied_norm) {
        // The Krylov space closed on an invariant subspace that need not hold
        // the lowest eigenvector (e.g. a seed that is itself an eigenvector).
        // Continue in a fixed fresh direction unless the space is exhausted.
        if (j + 1 < available && fresh_direction(basis.leftCols(j + 1), w)) {
          ++injections;
          if (j + 1 == m) fresh_tail = true;
          beta = 0.0;
          if (j + 1 < m) projected(j + 1, j) = projected(j, j + 1) = Scalar(0.0);
          basis.col(j + 1) = w;
          continue;
        }
        extent = j + 1;
        invariant = true;
        break;
      }
      if (j + 1 < m) {
        projected(j + 1, j) = Scalar(beta);
        projected(j, j + 1) = Scalar(beta);
      }
      basis.col(j + 1) = w / beta;
    }

    Eigen::SelfAdjointEigenSolver<Matrix> eig(projected.topLeftCorner(extent, extent));
    const auto& theta = eig.eigenvalues();
    const Matrix& ritz = eig.eigenvectors();
    // After an injection in the last column the estimate says nothing.
    const double estimate = invariant    ? 0.0
                            : fresh_tail ? std::numeric_limits<double>::infinity()
                                         : std::abs(beta * std::abs(ritz(extent - 1, 0)));
    out.gap_estimate = extent > 1 ? theta(1) - theta(0) : std::numeric_limits<double>::quiet_NaN();

    const bool budget_spent = out.iterations >= opt.max_iter;
    if (estimate <= opt.tol || invariant || budget_spent) {
      Vector y = basis.leftCols(extent) * ritz.col(0);
      deflate(y);
      y.normalize();
      apply(y, w);
      ++out.iterations;
      deflate(w);
      const double rq = detail::real_part(y.dot(w));
      const double residual = (w - rq * y).norm();
      out.residual_history.push_back(residual);
      best = std::min(best, residual);
      if (residual <= opt.tol) {
        out.value = rq;
        out.vector = std::move(y);
        out.residual = residual;
        return out;
      }
      if (out.iterations >= opt.max_iter) {
        throw ConvergenceError("lanczos: iteration budget exhausted", best, out.residual_history);
      }
      if (invariant || estimate <= opt.tol) {
        // Estimate and true residual disagree; start over from the Ritz vector.
        basis.col(0) = y;
        projected.setZero();
        head = 0;
        continue;
      }
    }

    const Index kept = std::min(keep, extent - 1);
    Matrix ritz_vectors = basis.leftCols(extent) * ritz.leftCols(kept);
    basis.col(kept) = basis.col(extent);
    basis.leftCols(kept) = ritz_vectors;
    projected.setZero();
    for (Index i = 0; i < kept; ++i) projected(i, i) = Scalar(theta(i));
    head = kept;
  }
}

}  // namespace nelson::spectral
