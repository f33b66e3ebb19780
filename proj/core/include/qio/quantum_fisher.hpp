#pragma once

#include <span>

#include "qio/operator_core.hpp"

namespace qio {

/// Symmetric logarithmic derivative S with (S rho + rho S) / 2 = drho, solved
/// in the eigenbasis of rho: S_jk = 2 drho_jk / (lambda_j + lambda_k).
/// Entries with lambda_j + lambda_k <= 1e-14 must have |drho_jk| <= 1e-12,
/// otherwise Errc::singular_state.
CMatrix sld(const DensityOperator& rho, const CMatrix& drho);

/// F_ij = Re Tr(rho (S_i S_j + S_j S_i)) / 2.
Matrix qfi_matrix(const DensityOperator& rho, std::span<const CMatrix> drhos);

/// 4 Var_psi(G) for the unitary family exp(-i theta G)|psi>.
double pure_state_qfi(const CVector& psi, const CMatrix& generator);

/// Tr(F^{-1}), the scalar mean-square-error bound implied by the quantum
/// Cramer-Rao inequality. Throws Errc::singular_state when F is singular.
double trivial_mse_bound(const Matrix& fisher);

}  // namespace qio
