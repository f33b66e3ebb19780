#include "kraus_step.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "qio/error.hpp"
#include "qio/linalg.hpp"

namespace qio::detail {

StepKit::StepKit(const QMarkovModel& model, double dt) : dt_(dt), l_(model.L()) {
  ldl_ = l_.adjoint() * l_;
  m0_ = CMatrix(-(kI * model.H() + 0.5 * ldl_) * dt).exp();
}

CMatrix StepKit::diffusive(const CMatrix& rho, double dy) const {
  const CMatrix m = m0_ + dy * l_;
  return m * rho * m.adjoint();
}

CMatrix StepKit::drift(const CMatrix& rho) const { return m0_ * rho * m0_.adjoint(); }

CMatrix StepKit::jump(const CMatrix& rho) const { return l_ * rho * l_.adjoint(); }

double StepKit::homodyne_mean(const CMatrix& rho) const { return 2.0 * (l_ * rho).trace().real(); }

double StepKit::jump_rate(const CMatrix& rho) const { return (ldl_ * rho).trace().real(); }

double normalize_state(CMatrix& rho) {
  const double tr = rho.trace().real();
  rho = hermitian_part(rho) / tr;
  const Index d = rho.rows();
  Eigen::LLT<CMatrix> llt(rho + 1e-12 * CMatrix::Identity(d, d));
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
    Vector ev = es.eigenvalues().cwiseMax(0.0);
    rho = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    rho = hermitian_part(rho) / rho.trace().real();
  }
  return tr;
}

CountingGrid counting_grid(double horizon, const std::vector<double>& jumps, double dt) {
  require(dt > 0.0, "integration step must be positive");
  CountingGrid g;
  g.steps = std::max<Index>(1, static_cast<Index>(std::ceil(horizon / dt - 1e-9)));
  g.dt = horizon / static_cast<double>(g.steps);
  g.jump_steps.reserve(jumps.size());
  for (double t : jumps) {
    Index k = static_cast<Index>(std::ceil(t / g.dt - 1e-9)) - 1;
    g.jump_steps.push_back(std::clamp<Index>(k, 0, g.steps - 1));
  }
  return g;
}

}  // namespace qio::detail
