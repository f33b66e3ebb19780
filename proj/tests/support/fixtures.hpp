#pragma once

#include <cmath>

#include "qio/family.hpp"
#include "qio/linalg.hpp"
#include "qio/linear_system.hpp"
#include "qio/operator_core.hpp"

namespace qio::testing {

/// H = (omega / 2) sigma_x, L = sqrt(kappa) sigma^-.
inline QMarkovModel driven_qubit(double omega = 1.0, double kappa = 1.0) {
  return QMarkovModel(0.5 * omega * pauli::x(), std::sqrt(kappa) * pauli::lower());
}

/// Rabi frequency family around omega = 0 with fixed kappa.
inline ParameterFamily rabi_family(double kappa, double lo, double hi) {
  const CMatrix zero = CMatrix::Zero(2, 2);
  return ParameterFamily::affine(QMarkovModel(zero, std::sqrt(kappa) * pauli::lower()), {0.5 * pauli::x()}, {zero},
                                 Box::interval(lo, hi));
}

/// A = [[-kappa/2, delta], [-delta, -kappa/2]], B = -sqrt(kappa) I, C = sqrt(kappa) I, D = I.
inline LinearQSystem cavity(double delta = 1.0, double kappa = 1.0) {
  Matrix a(2, 2);
  a << -0.5 * kappa, delta, -delta, -0.5 * kappa;
  const Matrix eye = Matrix::Identity(2, 2);
  return LinearQSystem::make(a, -std::sqrt(kappa) * eye, std::sqrt(kappa) * eye);
}

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }
inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace qio::testing
