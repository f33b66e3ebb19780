#include "qio/linear_system.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "qio/error.hpp"
#include "qio/linalg.hpp"
#include "qio/riccati.hpp"

namespace qio {

namespace {

constexpr double kPr2Tol = 1e-8;

}  // namespace

LinearQSystem LinearQSystem::make(Matrix A, Matrix B, Matrix C, Matrix D) {
  LinearQSystem g;
  g.n = A.rows() / 2;
  g.A = std::move(A);
  g.B = std::move(B);
  g.C = std::move(C);
  g.D = std::move(D);
  g.validate();
  return g;
}

void LinearQSystem::validate() const {
  require(n >= 1, "linear system needs at least one mode");
  const Index s = 2 * n;
  require(A.rows() == s && A.cols() == s, "A must be 2n x 2n");
  require(B.rows() == s && B.cols() == 2, "B must be 2n x 2");
  require(C.rows() == 2 && C.cols() == s, "C must be 2 x 2n");
  require(D.rows() == 2 && D.cols() == 2, "D must be 2 x 2");
  require(A.allFinite() && B.allFinite() && C.allFinite() && D.allFinite(), "system matrices must be finite");
}

void QuadraticSpec::validate() const {
  require(R.rows() >= 2 && R.rows() % 2 == 0 && R.rows() == R.cols(), "R must be 2n x 2n");
  require(max_abs(Matrix(R - R.transpose())) <= 1e-12, "R must be symmetric");
  require(K.rows() == 1 && K.cols() == R.rows(), "K must be a 1 x 2n row");
}

Matrix symplectic_unit() {
  Matrix j(2, 2);
  j << 0, 1, -1, 0;
  return j;
}

Matrix symplectic_form(Index n) { return kron(Matrix(Matrix::Identity(n, n)), symplectic_unit()); }

bool is_symplectic(const Matrix& v, double tol) {
  if (v.rows() != v.cols() || v.rows() % 2 != 0) return false;
  const Matrix jn = symplectic_form(v.rows() / 2);
  return max_abs(Matrix(v * jn * v.transpose() - jn)) <= tol;
}

LinearQSystem build_linear_system(const QuadraticSpec& spec) {
  spec.validate();
  const Index n = spec.n();
  const Matrix jn = symplectic_form(n);
  const Matrix rs = 0.5 * (spec.R + spec.R.transpose());
  const Matrix im_kk = (spec.K.adjoint() * spec.K).imag();
  Matrix noise(2 * n, 2);
  noise.col(0) = -spec.K.imag().transpose();
  noise.col(1) = spec.K.real().transpose();
  Matrix c(2, 2 * n);
  c.row(0) = 2.0 * spec.K.real();
  c.row(1) = 2.0 * spec.K.imag();
  return LinearQSystem::make(2.0 * jn * (rs + im_kk), 2.0 * jn * noise, c);
}

double check_pr1(const LinearQSystem& g) {
  g.validate();
  const Matrix jn = symplectic_form(g.n);
  const Matrix j = symplectic_unit();
  const double r1 = max_abs(Matrix(g.A * jn + jn * g.A.transpose() + g.B * j * g.B.transpose()));
  const double r2 = max_abs(Matrix(jn * g.C.transpose() + g.B * j * g.D.transpose()));
  return std::max(r1, r2);
}

double pr2_residual(const LinearQSystem& g, const Matrix& z) {
  const Matrix j = symplectic_unit();
  const double r1 = max_abs(Matrix(g.A * z + z * g.A.transpose() + g.B * j * g.B.transpose()));
  const double r2 = max_abs(Matrix(z * g.C.transpose() + g.B * j * g.D.transpose()));
  return std::max(r1, r2);
}

Pr2Result check_pr2(const LinearQSystem& g) {
  g.validate();
  const Index s = 2 * g.n;
  const Matrix j = symplectic_unit();
  const Index unknowns = s * (s - 1) / 2;
  const Index eqs = s * s + s * 2;
  Matrix op(eqs, unknowns);
  Index col = 0;
  for (Index a = 0; a < s; ++a) {
    for (Index b = a + 1; b < s; ++b, ++col) {
      Matrix e = Matrix::Zero(s, s);
      e(a, b) = 1.0;
      e(b, a) = -1.0;
      const Matrix lyap = g.A * e + e * g.A.transpose();
      const Matrix out = e * g.C.transpose();
      op.col(col) << Eigen::Map<const Vector>(lyap.data(), lyap.size()), Eigen::Map<const Vector>(out.data(), out.size());
    }
  }
  const Matrix c1 = g.B * j * g.B.transpose();
  const Matrix c2 = g.B * j * g.D.transpose();
  Vector rhs(eqs);
  rhs << -Eigen::Map<const Vector>(c1.data(), c1.size()), -Eigen::Map<const Vector>(c2.data(), c2.size());
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(op);
  cod.setThreshold(1e-12);
  const Vector zvec = cod.solve(rhs);
  Matrix z = Matrix::Zero(s, s);
  col = 0;
  for (Index a = 0; a < s; ++a)
    for (Index b = a + 1; b < s; ++b, ++col) {
      z(a, b) = zvec(col);
      z(b, a) = -zvec(col);
    }

  Pr2Result res;
  res.residual = pr2_residual(g, z);
  const double scale = std::max({1.0, max_abs(g.A), max_abs(g.B) * max_abs(g.B)});
  if (res.residual > kPr2Tol * scale) {
    res.status = Pr2Status::no_skew_solution;
    return res;
  }
  const double znorm = max_abs(z);
  if (znorm <= 1e-12 * scale) {
    res.status = Pr2Status::no_skew_solution;
    return res;
  }
  res.Z = z;
  try {
    res.V = symplectic_factor(z);
    res.status = Pr2Status::ok;
  } catch (const Error& e) {
    if (e.code() != Errc::singular_z) throw;
    res.status = Pr2Status::singular_z;
  }
  return res;
}

Pr2Result solve_pr2(const LinearQSystem& g) {
  Pr2Result res = check_pr2(g);
  if (res.status == Pr2Status::no_skew_solution)
    fail(Errc::no_skew_solution, "no non-trivial skew solution (residual " + std::to_string(res.residual) + ")");
  if (res.status == Pr2Status::singular_z) fail(Errc::singular_z, "the skew solution Z is singular");
  return res;
}

Matrix symplectic_factor(const Matrix& z) {
  require(z.rows() == z.cols() && z.rows() % 2 == 0 && z.rows() >= 2, "Z must be 2n x 2n");
  require(max_abs(Matrix(z + z.transpose())) <= 1e-9 * std::max(1.0, max_abs(z)), "Z must be skew-symmetric");
  const Index s = z.rows();
  const double scale = std::max(max_abs(z), std::numeric_limits<double>::min());
  Eigen::RealSchur<Matrix> rs(z);
  Matrix u = rs.matrixU();
  const Matrix& t = rs.matrixT();
  Vector diag(s);
  Index i = 0;
  while (i < s) {
    if (i + 1 >= s || std::abs(t(i + 1, i)) <= 1e-14 * scale) fail(Errc::singular_z, "Z has a zero eigenvalue");
    const double b = t(i, i + 1);
    const double mag = std::sqrt(std::abs(b * t(i + 1, i)));
    if (mag <= 1e-10 * scale) fail(Errc::singular_z, "Z is numerically singular");
    if (b < 0.0) u.col(i).swap(u.col(i + 1));
    diag(i) = diag(i + 1) = std::sqrt(mag);
    i += 2;
  }
  Matrix v = u * diag.asDiagonal();
  const Matrix jn = symplectic_form(s / 2);
  if (max_abs(Matrix(v * jn * v.transpose() - z)) > 1e-8 * scale)
    fail(Errc::singular_z, "skew canonical decomposition failed");
  return v;
}

CMatrix transfer_function(const LinearQSystem& g, cplx s) {
  g.validate();
  const Index n = 2 * g.n;
  const CMatrix m = s * CMatrix::Identity(n, n) - g.A.cast<cplx>();
  Eigen::JacobiSVD<CMatrix> svd(m);
  const Vector& sv = svd.singularValues();
  if (sv(n - 1) <= 1e-13 * std::max(1.0, sv(0)))
    fail(Errc::singular_resolvent, "s is (numerically) an eigenvalue of A");
  const CMatrix x = m.partialPivLu().solve(g.B.cast<cplx>());
  return g.C.cast<cplx>() * x + g.D.cast<cplx>();
}

void GaussianInput::validate() const {
  require(Gamma.rows() == 2 && Gamma.cols() == 2, "Gamma must be 2 x 2");
  require(max_abs(Matrix(Gamma - Gamma.transpose())) <= 1e-12, "Gamma must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(Gamma, Eigen::EigenvaluesOnly);
  require(es.eigenvalues()(0) >= -1e-12, "Gamma must be positive semidefinite");
}

CMatrix power_spectrum(const LinearQSystem& g, const GaussianInput& input, double omega) {
  input.validate();
  if (!is_hurwitz(g.A)) fail(Errc::not_hurwitz, "power spectrum requires a Hurwitz A");
  const CMatrix xi = transfer_function(g, cplx(0.0, omega));
  const CMatrix phi = xi.conjugate() * input.Gamma.cast<cplx>() * xi.transpose();
  return 0.5 * (phi + phi.adjoint());
}

LinearQSystem symplectic_transform(const LinearQSystem& g, const Matrix& v) {
  g.validate();
  require(v.rows() == 2 * g.n && v.cols() == 2 * g.n, "V must be 2n x 2n");
  Eigen::FullPivLU<Matrix> lu(v);
  require(lu.isInvertible(), "V must be invertible");
  const Matrix vinv = lu.inverse();
  return LinearQSystem::make(v * g.A * vinv, v * g.B, g.C * vinv, g.D);
}

bool minimality_check(const LinearQSystem& g) {
  g.validate();
  const Index s = 2 * g.n;
  Matrix ctrb(s, 2 * s), obsv(2 * s, s);
  Matrix blk = g.B, row = g.C;
  for (Index k = 0; k < s; ++k) {
    ctrb.middleCols(2 * k, 2) = blk;
    obsv.middleRows(2 * k, 2) = row;
    blk = g.A * blk;
    row = row * g.A;
  }
  return numerical_rank(ctrb, 1e-9) == s && numerical_rank(obsv, 1e-9) == s;
}

Index quadrature_row(Quadrature q) { return q == Quadrature::Q ? 0 : 1; }

KalmanResult kalman_gain(const LinearQSystem& g, Quadrature quadrature) {
  g.validate();
  if (!is_hurwitz(g.A)) fail(Errc::not_hurwitz, "Kalman filter requires a Hurwitz A");
  const Index m = quadrature_row(quadrature);
  const Matrix cm = g.C.row(m);
  const Matrix dm = g.D.row(m);
  const Matrix r = dm * dm.transpose();
  require(r(0, 0) > 0.0, "D_m D_m^T must be positive");
  const Matrix q = g.B * g.B.transpose();
  const Matrix s = g.B * dm.transpose();
  KalmanResult out;
  out.Q_m = solve_filter_care(g.A, cm, q, s, r);
  out.L_m = (out.Q_m * cm.transpose() + s) / r(0, 0);
  out.riccati_residual = filter_care_residual(g.A, cm, q, s, r, out.Q_m);
  out.closed_loop = g.A - out.L_m * cm;
  if (!is_hurwitz(out.closed_loop)) fail(Errc::riccati_failure, "Kalman closed loop is not Hurwitz");
  return out;
}

double lag1_autocorrelation(const Vector& e) {
  require(e.size() >= 2, "need at least two samples");
  const double den = e.squaredNorm();
  if (den == 0.0) return 0.0;
  return e.head(e.size() - 1).dot(e.tail(e.size() - 1)) / den;
}

RigidityReport gamma_rigidity_heuristic(const Matrix& gamma, std::size_t samples, std::uint64_t seed, double tol) {
  require(gamma.rows() == 2 && gamma.cols() == 2, "Gamma must be 2 x 2");
  RandomStream rng(seed);
  RigidityReport rep;
  rep.samples = samples;
  const double scale = std::max(1.0, max_abs(gamma));
  for (std::size_t k = 0; k < samples; ++k) {
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    const double reduced = std::fmod(theta, std::numbers::pi);
    const double dist = std::min(reduced, std::numbers::pi - reduced);
    if (dist < 1e-6) continue;
    Matrix rot(2, 2);
    rot << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
    if (max_abs(Matrix(rot * gamma * rot.transpose() - gamma)) <= tol * scale)
      rep.max_invariant_angle = std::max(rep.max_invariant_angle, dist);
  }
  rep.rigid = rep.max_invariant_angle == 0.0;
  return rep;
}

Matrix random_symplectic(Index n, RandomStream& rng, double scale) {
  Matrix s(2 * n, 2 * n);
  for (Index j = 0; j < s.cols(); ++j)
    for (Index i = 0; i < s.rows(); ++i) s(i, j) = scale * rng.normal();
  s = (0.5 * (s + s.transpose())).eval();
  return Matrix(symplectic_form(n) * s).exp();
}

QuadraticSpec random_quadratic_spec(Index n, RandomStream& rng) {
  QuadraticSpec spec;
  spec.R = Matrix(2 * n, 2 * n);
  for (Index j = 0; j < 2 * n; ++j)
    for (Index i = 0; i < 2 * n; ++i) spec.R(i, j) = rng.normal();
  spec.R = (0.5 * (spec.R + spec.R.transpose())).eval();
  spec.K = CMatrix(1, 2 * n);
  for (Index j = 0; j < 2 * n; ++j) spec.K(0, j) = cplx(rng.normal(), rng.normal());
  return spec;
}

LinearQSystem random_realizable_system(Index n, RandomStream& rng) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const LinearQSystem g = build_linear_system(random_quadratic_spec(n, rng));
    if (spectral_abscissa(g.A) < -1e-2 && spectral_radius(g.A) < 50.0 && minimality_check(g)) return g;
  }
  fail(Errc::invalid_argument, "could not sample a Hurwitz minimal system");
}

}  // namespace qio
