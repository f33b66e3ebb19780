#include "qio/riccati.hpp"

#include <cmath>

#include <Eigen/LU>
#include <Eigen/QR>

#include "qio/error.hpp"
#include "qio/linalg.hpp"

namespace qio {

namespace {

Matrix sym(const Matrix& x) { return 0.5 * (x + x.transpose()); }

/// Matrix sign function by the scaled Newton iteration.
bool matrix_sign(Matrix& z) {
  const Index n = z.rows();
  for (int it = 0; it < 200; ++it) {
    Eigen::PartialPivLU<Matrix> lu(z);
    double logdet = 0.0;
    for (Index i = 0; i < n; ++i) logdet += std::log(std::abs(lu.matrixLU()(i, i)));
    if (!std::isfinite(logdet)) return false;
    const double c = std::exp(-logdet / static_cast<double>(n));
    const Matrix next = 0.5 * (c * z + lu.inverse() / c);
    const double change = (next - z).lpNorm<1>();
    z = next;
    if (!z.allFinite()) return false;
    if (change <= 1e-13 * z.lpNorm<1>()) return true;
  }
  return false;
}

}  // namespace

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  const Index n = a.rows();
  require(a.cols() == n && q.rows() == n && q.cols() == n, "Lyapunov operands must be square of equal size");
  const Matrix id = Matrix::Identity(n, n);
  const Matrix op = kron(id, a) + kron(a, id);
  const Vector rhs = -Eigen::Map<const Vector>(q.data(), q.size());
  Eigen::FullPivLU<Matrix> lu(op);
  if (!lu.isInvertible()) fail(Errc::riccati_failure, "Lyapunov operator is singular");
  const Vector x = lu.solve(rhs);
  return Eigen::Map<const Matrix>(x.data(), n, n);
}

double filter_care_residual(const Matrix& a, const Matrix& c, const Matrix& q, const Matrix& s, const Matrix& r,
                            const Matrix& x) {
  const Matrix gain = x * c.transpose() + s;
  const Matrix res = a * x + x * a.transpose() + q - gain * r.inverse() * gain.transpose();
  return max_abs(res);
}

Matrix solve_filter_care(const Matrix& a, const Matrix& c, const Matrix& q, const Matrix& s, const Matrix& r) {
  const Index n = a.rows();
  require(a.cols() == n && q.rows() == n && c.cols() == n && s.rows() == n && s.cols() == c.rows() &&
              r.rows() == c.rows() && r.cols() == c.rows(),
          "Riccati operands have inconsistent shapes");
  const Matrix rinv = r.inverse();
  const Matrix at = a - s * rinv * c;
  const Matrix qt = sym(q - s * rinv * s.transpose());
  const Matrix g = sym(c.transpose() * rinv * c);

  Matrix ham(2 * n, 2 * n);
  ham << at.transpose(), -g, -qt, -at;
  Matrix sgn = ham;
  if (!matrix_sign(sgn)) fail(Errc::riccati_failure, "Hamiltonian matrix has eigenvalues on the imaginary axis");
  const Matrix proj = Matrix::Identity(2 * n, 2 * n) - sgn;
  Eigen::ColPivHouseholderQR<Matrix> qr(proj);
  const Matrix basis = Matrix(qr.householderQ()).leftCols(n);
  const Matrix u1 = basis.topRows(n), u2 = basis.bottomRows(n);
  Eigen::FullPivLU<Matrix> lu(u1.transpose());
  if (!lu.isInvertible()) fail(Errc::riccati_failure, "stable invariant subspace is not a graph");
  Matrix x = sym(Matrix(lu.solve(u2.transpose())).transpose());

  double res = filter_care_residual(a, c, q, s, r, x);
  for (int it = 0; it < 20 && res > 1e-14 * std::max(1.0, max_abs(x)); ++it) {
    const Matrix acl = at - x * g;
    Matrix next;
    try {
      next = sym(solve_lyapunov(acl, qt + x * g * x));
    } catch (const Error&) {
      break;
    }
    const double next_res = filter_care_residual(a, c, q, s, r, next);
    if (!(next_res < res)) break;
    x = next;
    res = next_res;
  }
  if (!x.allFinite() || res > 1e-6 * std::max(1.0, max_abs(x)))
    fail(Errc::riccati_failure, "Riccati residual " + std::to_string(res));
  return x;
}

Matrix solve_filter_dare(const Matrix& a, const Matrix& c, const Matrix& q, const Matrix& s, const Matrix& r) {
  const Index n = a.rows();
  require(a.cols() == n && q.rows() == n && c.cols() == n && s.rows() == n && s.cols() == c.rows(),
          "Riccati operands have inconsistent shapes");
  Matrix p = sym(q);
  for (int it = 0; it < 200000; ++it) {
    const Matrix gain = a * p * c.transpose() + s;
    const Matrix inn = c * p * c.transpose() + r;
    const Matrix next = sym(a * p * a.transpose() + q - gain * inn.ldlt().solve(gain.transpose()));
    if (!next.allFinite()) break;
    const double change = max_abs(Matrix(next - p));
    p = next;
    if (change <= 1e-14 * std::max(1.0, max_abs(p))) return p;
  }
  fail(Errc::riccati_failure, "discrete Riccati iteration did not converge");
}

}  // namespace qio
