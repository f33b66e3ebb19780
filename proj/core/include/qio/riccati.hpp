#pragma once

#include "qio/types.hpp"

namespace qio {

/// X with A X + X A^T + Q = 0 (dense Kronecker solve).
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

/// Stabilising solution of the filter Riccati equation
/// A X + X A^T + Q - (X C^T + S) R^{-1} (X C^T + S)^T = 0,
/// computed from the stable invariant subspace of the Hamiltonian matrix
/// (matrix sign iteration) and polished by Newton steps.
/// Throws Errc::riccati_failure.
Matrix solve_filter_care(const Matrix& a, const Matrix& c, const Matrix& q, const Matrix& s, const Matrix& r);

double filter_care_residual(const Matrix& a, const Matrix& c, const Matrix& q, const Matrix& s, const Matrix& r,
                            const Matrix& x);

/// Stabilising solution of the discrete filter Riccati equation
/// P = A P A^T + Q - (A P C^T + S)(C P C^T + R)^{-1}(A P C^T + S)^T
/// by fixed-point iteration. Throws Errc::riccati_failure.
Matrix solve_filter_dare(const Matrix& a, const Matrix& c, const Matrix& q, const Matrix& s, const Matrix& r);

}  // namespace qio
