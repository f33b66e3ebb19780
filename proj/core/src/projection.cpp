#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "qio/error.hpp"
#include "qio/linalg.hpp"
#include "qio/parallel.hpp"
#include "qio/random.hpp"
#include "qio/riccati.hpp"
#include "qio/sysid.hpp"

namespace qio {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix sym(const Matrix& x) { return 0.5 * (x + x.transpose()); }

/// Parameter layout: upper triangle of R, Re K, Im K, vec T.
struct Layout {
  Index s;
  Index r_count() const { return s * (s + 1) / 2; }
  Index size() const { return r_count() + 2 * s + s * s; }

  Vector pack(const Matrix& R, const CMatrix& K, const Matrix& T) const {
    Vector p(size());
    Index k = 0;
    for (Index j = 0; j < s; ++j)
      for (Index i = 0; i <= j; ++i) p(k++) = R(i, j);
    for (Index i = 0; i < s; ++i) p(k++) = K(0, i).real();
    for (Index i = 0; i < s; ++i) p(k++) = K(0, i).imag();
    for (Index i = 0; i < s * s; ++i) p(k++) = T.data()[i];
    return p;
  }

  void unpack(const Vector& p, Matrix& R, CMatrix& K, Matrix& T) const {
    R.resize(s, s);
    K.resize(1, s);
    T.resize(s, s);
    Index k = 0;
    for (Index j = 0; j < s; ++j)
      for (Index i = 0; i <= j; ++i) R(i, j) = R(j, i) = p(k++);
    for (Index i = 0; i < s; ++i) K(0, i) = cplx(p(k++), 0.0);
    for (Index i = 0; i < s; ++i) K(0, i) += cplx(0.0, p(k++));
    for (Index i = 0; i < s * s; ++i) T.data()[i] = p(k++);
  }
};

/// (R, K) whose canonical system (A0, B0) is closest to (a, b) in the
/// coordinates where Z = J_n.
void extract_spec(const Matrix& a, const Matrix& b, const Matrix& d, Matrix& R, CMatrix& K) {
  const Index s = a.rows();
  const Matrix jn = symplectic_form(s / 2);
  const Matrix j = symplectic_unit();
  const Matrix c0t = jn * b * j * d.transpose();
  K.resize(1, s);
  for (Index i = 0; i < s; ++i) K(0, i) = 0.5 * cplx(c0t(i, 0), c0t(i, 1));
  R = sym(-0.5 * jn * (a - 0.5 * b * j * b.transpose() * jn));
}

struct Problem {
  const ContinuousTriple& raw;
  const Matrix& D;
  Index row;
  Layout layout;

  Index residual_size() const { return raw.A.size() + raw.B.size() + raw.Cm.size(); }

  bool residual(const Vector& p, Vector& r) const {
    Matrix R, T;
    CMatrix K;
    layout.unpack(p, R, K, T);
    Eigen::PartialPivLU<Matrix> lu(T);
    const double cond_guard = std::abs(lu.matrixLU().diagonal().prod());
    if (!(cond_guard > 1e-14 * std::pow(std::max(1.0, T.cwiseAbs().maxCoeff()), static_cast<double>(T.rows()))))
      return false;
    LinearQSystem g;
    try {
      g = realizable_from_parameters(R, K, T, D);
    } catch (const Error&) {
      return false;
    }
    r.resize(residual_size());
    Index k = 0;
    const Matrix da = g.A - raw.A, db = g.B - raw.B;
    const Matrix dc = g.C.row(row) - raw.Cm;
    r.segment(k, da.size()) = Eigen::Map<const Vector>(da.data(), da.size());
    k += da.size();
    r.segment(k, db.size()) = Eigen::Map<const Vector>(db.data(), db.size());
    k += db.size();
    r.segment(k, dc.size()) = Eigen::Map<const Vector>(dc.data(), dc.size());
    return r.allFinite();
  }
};

double cost_of(const Problem& prob, const Vector& p) {
  Vector r;
  if (!prob.residual(p, r)) return kInf;
  return 0.5 * r.squaredNorm();
}

/// Levenberg-Marquardt with central-difference Jacobians.
Vector levenberg_marquardt(const Problem& prob, Vector p, int max_iterations, double& cost) {
  Vector r;
  if (!prob.residual(p, r)) {
    cost = kInf;
    return p;
  }
  cost = 0.5 * r.squaredNorm();
  double mu = 1e-3;
  const Index np = p.size(), nr = r.size();
  Matrix jac(nr, np);
  for (int it = 0; it < max_iterations && cost > 1e-30; ++it) {
    bool ok = true;
    for (Index k = 0; k < np && ok; ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(p(k)));
      Vector pp = p, pm = p, rp, rm;
      pp(k) += h;
      pm(k) -= h;
      ok = prob.residual(pp, rp) && prob.residual(pm, rm);
      if (ok) jac.col(k) = (rp - rm) / (2.0 * h);
    }
    if (!ok) break;
    const Matrix jtj = jac.transpose() * jac;
    const Vector g = jac.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() <= 1e-15 * std::max(1.0, cost)) break;
    bool accepted = false;
    for (int tries = 0; tries < 30; ++tries) {
      Matrix sys = jtj;
      sys.diagonal().array() += mu * (1.0 + jtj.diagonal().array());
      const Vector step = sys.ldlt().solve(-g);
      Vector cand = p + step;
      Vector rc;
      if (prob.residual(cand, rc)) {
        const double cc = 0.5 * rc.squaredNorm();
        if (cc < cost) {
          const double rel = step.norm() / std::max(1.0, p.norm());
          const double drop = cost - cc;
          p = cand;
          r = rc;
          cost = cc;
          mu = std::max(mu / 3.0, 1e-12);
          accepted = true;
          if (rel < 1e-14 || drop < 1e-16 * cost) it = max_iterations;
          break;
        }
      }
      mu *= 4.0;
    }
    if (!accepted) break;
  }
  return p;
}

/// Skew Z solving the realizability equations of the raw estimate that involve
/// only measured quantities.
std::optional<Matrix> measured_z(const ContinuousTriple& raw, const Matrix& D, Index row) {
  const Index s = raw.A.rows();
  const Matrix j = symplectic_unit();
  const Index nz = s * (s - 1) / 2;
  std::vector<Matrix> basis;
  for (Index c = 0; c < s; ++c)
    for (Index r = 0; r < c; ++r) {
      Matrix e = Matrix::Zero(s, s);
      e(r, c) = 1.0;
      e(c, r) = -1.0;
      basis.push_back(e);
    }
  const Index neq = s * s + s;
  Matrix m(neq, nz);
  for (Index k = 0; k < nz; ++k) {
    const Matrix& e = basis[static_cast<std::size_t>(k)];
    const Matrix lyap = raw.A * e + e * raw.A.transpose();
    m.col(k).head(s * s) = Eigen::Map<const Vector>(lyap.data(), s * s);
    m.col(k).tail(s) = e * raw.Cm.transpose();
  }
  const Matrix bjb = raw.B * j * raw.B.transpose();
  Vector rhs(neq);
  rhs.head(s * s) = -Eigen::Map<const Vector>(bjb.data(), s * s);
  rhs.tail(s) = -(raw.B * j * D.row(row).transpose());
  const Vector x = m.completeOrthogonalDecomposition().solve(rhs);
  Matrix z = Matrix::Zero(s, s);
  for (Index k = 0; k < nz; ++k) z += x(k) * basis[static_cast<std::size_t>(k)];
  if (!z.allFinite()) return std::nullopt;
  return z;
}

/// Similarity T with x = T x_b taking the raw triple to balanced coordinates.
std::optional<Matrix> balancing_transform(const ContinuousTriple& raw) {
  if (!is_hurwitz(raw.A)) return std::nullopt;
  try {
    const Matrix wc = sym(solve_lyapunov(raw.A, raw.B * raw.B.transpose()));
    const Matrix wo = sym(solve_lyapunov(raw.A.transpose(), raw.Cm.transpose() * raw.Cm));
    Eigen::LLT<Matrix> llt(wc);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Matrix lc = llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym(lc.transpose() * wo * lc));
    const Vector ev = es.eigenvalues();
    if (!(ev.minCoeff() > 1e-12 * ev.maxCoeff())) return std::nullopt;
    const Vector scale = ev.array().sqrt().sqrt().inverse();
    Matrix t = lc * es.eigenvectors() * scale.asDiagonal();
    if (!t.allFinite()) return std::nullopt;
    return t;
  } catch (const Error&) {
    return std::nullopt;
  }
}

Vector start_from_transform(const Layout& layout, const ContinuousTriple& raw, const Matrix& D, const Matrix& t) {
  Eigen::PartialPivLU<Matrix> lu(t);
  const Matrix a = lu.solve(raw.A * t);
  const Matrix b = lu.solve(raw.B);
  Matrix R;
  CMatrix K;
  extract_spec(a, b, D, R, K);
  return layout.pack(R, K, t);
}

}  // namespace

LinearQSystem realizable_from_parameters(const Matrix& R, const CMatrix& K, const Matrix& T, const Matrix& D) {
  const Index s = R.rows();
  require(s >= 2 && s % 2 == 0 && R.cols() == s, "R must be 2n x 2n");
  require(K.rows() == 1 && K.cols() == s, "K must be 1 x 2n");
  require(T.rows() == s && T.cols() == s, "T must be 2n x 2n");
  require(D.rows() == 2 && D.cols() == 2, "D must be 2 x 2");
  if (!(std::abs(D.determinant()) > 1e-14)) fail(Errc::invalid_argument, "D must be invertible");
  const Matrix jn = symplectic_form(s / 2);
  const Matrix j = symplectic_unit();
  Matrix c0(2, s);
  c0.row(0) = 2.0 * K.real();
  c0.row(1) = 2.0 * K.imag();
  const Matrix dinvt = D.transpose().inverse();
  const Matrix b0 = jn * c0.transpose() * dinvt * j;
  const Matrix a0 = 2.0 * jn * sym(R) + 0.5 * b0 * j * b0.transpose() * jn;
  Eigen::FullPivLU<Matrix> tlu(T);
  if (!tlu.isInvertible()) fail(Errc::singular_z, "T is singular");
  const Matrix tinv = tlu.inverse();
  return LinearQSystem::make(T * a0 * tinv, T * b0, c0 * tinv, D);
}

Matrix recover_full_C(const Matrix& Z, const Matrix& B, const Matrix& D, Quadrature measured, const Matrix& C_m) {
  const Index s = Z.rows();
  require(s >= 2 && Z.cols() == s, "Z must be square");
  require(B.rows() == s && B.cols() == 2, "B must be 2n x 2");
  require(D.rows() == 2 && D.cols() == 2, "D must be 2 x 2");
  require(C_m.size() == 0 || (C_m.rows() == 1 && C_m.cols() == s), "C_m must be 1 x 2n");
  Eigen::FullPivLU<Matrix> lu(Z);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) fail(Errc::singular_z, "Z is singular");
  const Matrix ct = -lu.solve(B * symplectic_unit() * D.transpose());
  Matrix c = ct.transpose();
  if (C_m.size() != 0) c.row(quadrature_row(measured)) = C_m;
  return c;
}

ProjectionResult pr_projection(const ContinuousTriple& raw, const Matrix& D, Quadrature measured,
                               const ProjectionOptions& options) {
  const Index s = raw.A.rows();
  require(s >= 2 && s % 2 == 0 && raw.A.cols() == s, "A must be 2n x 2n");
  require(raw.B.rows() == s && raw.B.cols() == 2, "B must be 2n x 2");
  require(raw.Cm.rows() == 1 && raw.Cm.cols() == s, "C_m must be 1 x 2n");
  require(D.rows() == 2 && D.cols() == 2, "D must be 2 x 2");
  require(options.starts >= 1, "need at least one start");
  require(raw.A.allFinite() && raw.B.allFinite() && raw.Cm.allFinite(), "raw system has non-finite entries");

  const Index row = quadrature_row(measured);
  const Layout layout{s};
  const Problem prob{raw, D, row, layout};

  std::vector<Vector> starts;
  const Matrix eye = Matrix::Identity(s, s);
  if (auto z = measured_z(raw, D, row)) {
    try {
      starts.push_back(start_from_transform(layout, raw, D, symplectic_factor(*z)));
    } catch (const Error&) {
    }
  }
  starts.push_back(start_from_transform(layout, raw, D, eye));
  if (auto t = balancing_transform(raw)) starts.push_back(start_from_transform(layout, raw, D, *t));
  std::size_t best_seed = 0;
  double best_seed_cost = kInf;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const double c = cost_of(prob, starts[k]);
    if (c < best_seed_cost) {
      best_seed_cost = c;
      best_seed = k;
    }
  }
  const Vector centre = starts[best_seed];
  const double spread = 0.1 * std::max(1.0, centre.lpNorm<Eigen::Infinity>());
  for (std::uint64_t k = 0; static_cast<int>(starts.size()) < options.starts; ++k) {
    RandomStream rng(options.seed, 0x9e00 + k);
    Vector p = centre;
    for (Index i = 0; i < p.size(); ++i) p(i) += spread * rng.normal();
    starts.push_back(p);
  }
  starts.resize(static_cast<std::size_t>(options.starts));

  std::vector<Vector> finals(starts.size());
  std::vector<double> costs(starts.size(), kInf);
  parallel_for(starts.size(), [&](std::size_t k) {
    finals[k] = levenberg_marquardt(prob, starts[k], options.max_iterations, costs[k]);
  });

  ProjectionResult res;
  std::size_t best = starts.size();
  double lo = kInf, hi = -kInf;
  for (std::size_t k = 0; k < costs.size(); ++k) {
    res.start_costs.push_back(costs[k]);
    if (!std::isfinite(costs[k])) continue;
    lo = std::min(lo, costs[k]);
    hi = std::max(hi, costs[k]);
    if (best == starts.size() || costs[k] < costs[best]) best = k;
  }
  if (best == starts.size()) fail(Errc::optimization_failed, "no start reached a finite projection cost");
  Matrix R, T;
  CMatrix K;
  layout.unpack(finals[best], R, K, T);
  res.system = realizable_from_parameters(R, K, T, D);
  res.Z = T * symplectic_form(s / 2) * T.transpose();
  res.cost = costs[best];
  res.spread = hi - lo;
  res.pr2_residual = pr2_residual(res.system, res.Z);
  if (!(res.pr2_residual <= 1e-6 * std::max(1.0, max_abs(res.Z))))
    fail(Errc::optimization_failed, "projected system violates the realizability constraints");
  return res;
}

}  // namespace qio
