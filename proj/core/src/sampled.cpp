#include "qio/sampled.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

#include "qio/error.hpp"
#include "qio/riccati.hpp"

namespace qio {

namespace {

/// Phi1 = int_0^h e^{As} ds and Phi2 = int_0^h e^{As} (h - s) ds.
std::pair<Matrix, Matrix> integrals(const Matrix& a, double h) {
  const Index n = a.rows();
  Matrix m = Matrix::Zero(3 * n, 3 * n);
  m.topLeftCorner(n, n) = a;
  m.block(0, n, n, n).setIdentity();
  m.block(n, 2 * n, n, n).setIdentity();
  const Matrix e = Matrix(m * h).exp();
  return {e.block(0, n, n, n), e.block(0, 2 * n, n, n)};
}

}  // namespace

SampledModel discretize_sampled(const Matrix& A, const Matrix& B, const Matrix& Cm, const Matrix& Dm, double h) {
  require(h > 0.0, "sampling interval must be positive");
  require(A.rows() == A.cols() && B.rows() == A.rows() && Cm.cols() == A.rows() && Dm.rows() == Cm.rows() &&
              Dm.cols() == B.cols(),
          "sampled model operands have inconsistent shapes");
  const auto [phi1, phi2] = integrals(A, h);
  SampledModel out;
  out.Ad = Matrix(A * h).exp();
  out.Bd = phi1 * B;
  out.Cd = Cm * phi1 / h;
  out.Dd = Dm + Cm * phi2 * B / h;
  return out;
}

ContinuousTriple continuous_from_sampled(const Matrix& Ad, const Matrix& Bd, const Matrix& Cd, double h) {
  require(h > 0.0, "sampling interval must be positive");
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Matrix>(Ad, false).eigenvalues();
  for (Index i = 0; i < ev.size(); ++i) {
    const cplx z = ev(i);
    if (z.real() <= 0.0 && std::abs(z.imag()) <= 1e-10 * std::max(1.0, std::abs(z)))
      fail(Errc::log_branch, "discrete A has an eigenvalue on the negative real axis");
  }
  ContinuousTriple out;
  out.A = Matrix(Ad.log()) / h;
  const Matrix phi1 = integrals(out.A, h).first;
  Eigen::FullPivLU<Matrix> lu(phi1);
  if (!lu.isInvertible()) fail(Errc::log_branch, "sampling integral is singular");
  out.B = lu.solve(Bd);
  out.Cm = Cd * h * lu.inverse();
  return out;
}

ExactStep exact_innovation_step(const Matrix& A, const Matrix& B, const Matrix& Cm, const Matrix& Dm,
                                const Matrix& Lm, double h) {
  const Index s = A.rows();
  const Index m = B.cols();
  const Index na = s + 1;
  Matrix abar = Matrix::Zero(na, na);
  abar.topLeftCorner(s, s) = A;
  abar.bottomLeftCorner(1, s) = Cm;
  Matrix bbar(na, m);
  bbar << B, Dm;
  Vector gbar(na);
  gbar << Lm.col(0), 1.0;

  Matrix big = Matrix::Zero(na + m, na + m);
  big.topLeftCorner(na, na) = abar;
  big.topRightCorner(na, m) = bbar;
  const Matrix e = Matrix(big * h).exp();
  const Matrix phi = e.topLeftCorner(na, na);
  const Matrix gu = e.topRightCorner(na, m);

  Matrix vl = Matrix::Zero(2 * na, 2 * na);
  vl.topLeftCorner(na, na) = -abar;
  vl.topRightCorner(na, na) = gbar * gbar.transpose();
  vl.bottomRightCorner(na, na) = abar.transpose();
  const Matrix ev = Matrix(vl * h).exp();
  const Matrix f22 = ev.bottomRightCorner(na, na);
  const Matrix cov = f22.transpose() * ev.topRightCorner(na, na);

  ExactStep out;
  out.Az = phi.topLeftCorner(s, s);
  out.Bz = gu.topRows(s);
  out.Cy = phi.bottomLeftCorner(1, s);
  out.Dy = gu.bottomRows(1);
  out.cov = 0.5 * (cov + cov.transpose());
  return out;
}

DiscretePredictor sampled_predictor(const Matrix& A, const Matrix& B, const Matrix& Cm, const Matrix& Dm,
                                    const Matrix& Lm, double h) {
  const Index s = A.rows();
  const ExactStep st = exact_innovation_step(A, B, Cm, Dm, Lm, h);
  DiscretePredictor p;
  p.A = st.Az;
  p.B = st.Bz;
  p.C = st.Cy / h;
  p.D = st.Dy / h;
  const Matrix q = st.cov.topLeftCorner(s, s);
  const Matrix sv = st.cov.topRightCorner(s, 1) / h;
  const Matrix r = st.cov.bottomRightCorner(1, 1) / (h * h);
  const Matrix pcov = solve_filter_dare(p.A, p.C, q, sv, r);
  const Matrix inn = p.C * pcov * p.C.transpose() + r;
  p.K = (p.A * pcov * p.C.transpose() + sv) * inn.inverse();
  return p;
}

Matrix predict_outputs(const DiscretePredictor& model, const Matrix& inputs, const Matrix& outputs) {
  require(inputs.cols() == outputs.cols(), "inputs and outputs must have equal length");
  const Index n = inputs.cols();
  Vector x = Vector::Zero(model.A.rows());
  Matrix yhat(outputs.rows(), n);
  for (Index k = 0; k < n; ++k) {
    yhat.col(k) = model.C * x + model.D * inputs.col(k);
    x = model.A * x + model.B * inputs.col(k) + model.K * (outputs.col(k) - yhat.col(k));
  }
  return yhat;
}

}  // namespace qio
