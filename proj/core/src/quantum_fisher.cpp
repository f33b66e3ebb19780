#include "qio/quantum_fisher.hpp"

#include <Eigen/Eigenvalues>

#include "qio/error.hpp"
#include "qio/linalg.hpp"

namespace qio {

namespace {

constexpr double kDivisorCutoff = 1e-14;
constexpr double kSupportTol = 1e-12;

}  // namespace

CMatrix sld(const DensityOperator& rho, const CMatrix& drho) {
  const Index d = rho.dim();
  require(drho.rows() == d && drho.cols() == d, "drho shape does not match rho");
  require(std::abs(drho.trace()) <= 1e-10, "drho must be traceless");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.matrix());
  const CMatrix& u = es.eigenvectors();
  const Vector& lam = es.eigenvalues();
  const CMatrix dr = u.adjoint() * hermitian_part(drho) * u;
  CMatrix s = CMatrix::Zero(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index k = 0; k < d; ++k) {
      const double denom = lam(j) + lam(k);
      if (denom <= kDivisorCutoff) {
        if (std::abs(dr(j, k)) > kSupportTol)
          fail(Errc::singular_state, "drho has weight outside the support of rho");
        continue;
      }
      s(j, k) = 2.0 * dr(j, k) / denom;
    }
  }
  return hermitian_part(u * s * u.adjoint());
}

Matrix qfi_matrix(const DensityOperator& rho, std::span<const CMatrix> drhos) {
  const Index k = static_cast<Index>(drhos.size());
  std::vector<CMatrix> slds;
  slds.reserve(drhos.size());
  for (const CMatrix& dr : drhos) slds.push_back(sld(rho, dr));
  Matrix f(k, k);
  for (Index a = 0; a < k; ++a) {
    for (Index b = a; b < k; ++b) {
      const CMatrix prod = slds[a] * slds[b] + slds[b] * slds[a];
      f(a, b) = f(b, a) = 0.5 * (rho.matrix() * prod).trace().real();
    }
  }
  return f;
}

double pure_state_qfi(const CVector& psi, const CMatrix& generator) {
  require(std::abs(psi.norm() - 1.0) <= 1e-10, "state vector must be normalised");
  require(generator.rows() == psi.size() && generator.cols() == psi.size(), "generator shape mismatch");
  const CVector gpsi = generator * psi;
  const double mean = psi.dot(gpsi).real();
  const double second = gpsi.squaredNorm();
  return std::max(0.0, 4.0 * (second - mean * mean));
}

double trivial_mse_bound(const Matrix& fisher) {
  require(fisher.rows() == fisher.cols() && fisher.rows() > 0, "Fisher matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (fisher + fisher.transpose()));
  const Vector& ev = es.eigenvalues();
  if (ev(0) <= 1e-14 * std::max(1.0, ev(ev.size() - 1)))
    fail(Errc::singular_state, "Fisher information matrix is singular");
  return (1.0 / ev.array()).sum();
}

}  // namespace qio
