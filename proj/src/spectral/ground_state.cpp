#include <cmath>
#include <iostream>

#include "nelson/errors.hpp"
#include "nelson/spectral.hpp"

namespace nelson::spectral {

GroundState lanczos_ground(const SparseComplexMatrix& h, const LanczosOptions& opt) {
  if (h.rows() != h.cols() || h.rows() == 0) throw Error("lanczos_ground: need a non-empty square matrix");
  const auto n = h.rows();
  const StateVector seed = StateVector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  auto apply = [&](const StateVector& in, StateVector& out) { out.noalias() = h * in; };
  auto pair = lowest_eigenpair<std::complex<double>>(apply, seed, {}, opt);

  GroundState gs;
  gs.energy = pair.value;
  gs.psi = std::move(pair.vector);
  gs.eig_residual = pair.residual;
  gs.iterations = pair.iterations;
  gs.gap_estimate = pair.gap_estimate;
  return gs;
}

double expectation(const StateVector& psi, const OperatorApply& apply, double warn, double fail) {
  const std::complex<double> value = psi.dot(apply(psi));
  const double drift = std::abs(value.imag());
  if (drift > fail) {
    throw DiagnosticsError("expectation has imaginary part " + std::to_string(value.imag()) +
                           "; operator is not Hermitian");
  }
  if (drift > warn) {
    std::clog << "warning: expectation has imaginary part " << value.imag() << '\n';
  }
  return value.real();
}

}  // namespace nelson::spectral
