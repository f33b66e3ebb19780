#pragma once

#include "qio/types.hpp"

namespace qio {

CMatrix kron(const CMatrix& a, const CMatrix& b);
Matrix kron(const Matrix& a, const Matrix& b);

/// Column-stacking vectorisation: vec(A X B) = (B^T kron A) vec(X).
CVector vec(const CMatrix& x);
CMatrix unvec(const CVector& v, Index dim);

CMatrix hermitian_part(const CMatrix& x);
/// Operator imaginary part (X - X^dagger) / (2i); Hermitian for every X.
CMatrix im_part(const CMatrix& x);

double max_abs(const CMatrix& x);
double max_abs(const Matrix& x);
double hermiticity_defect(const CMatrix& x);

CMatrix commutator(const CMatrix& a, const CMatrix& b);
CMatrix anticommutator(const CMatrix& a, const CMatrix& b);

/// Smallest eigenvalue of the Hermitian part of `x`.
double min_eigenvalue(const CMatrix& x);

/// Largest real part over the spectrum of a real square matrix.
double spectral_abscissa(const Matrix& a);
double spectral_radius(const Matrix& a);
bool is_hurwitz(const Matrix& a);

/// Numerical rank with singular-value cutoff `rel_tol * sigma_max`.
Index numerical_rank(const Matrix& a, double rel_tol);

/// Pauli matrices and qubit ladder operators in the basis (|g>, |e>).
namespace pauli {
CMatrix x();
CMatrix y();
CMatrix z();
/// sigma^- = |g><e|.
CMatrix lower();
}  // namespace pauli

}  // namespace qio
