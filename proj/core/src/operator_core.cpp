#include "qio/operator_core.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "qio/error.hpp"
#include "qio/linalg.hpp"

namespace qio {

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kNullTol = 1e-10;
constexpr double kFullRankTol = 1e-10;

struct NullSpace {
  Index dimension = 0;
  CVector vector;
};

NullSpace generator_null_space(const CMatrix& gen) {
  Eigen::BDCSVD<CMatrix> svd(gen, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double cutoff = kNullTol * (s.size() > 0 ? s(0) : 0.0);
  NullSpace out;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) <= cutoff) ++out.dimension;
  out.vector = svd.matrixV().col(gen.cols() - 1);
  return out;
}

CMatrix density_from_null_vector(const CVector& v, Index dim) {
  CMatrix rho = unvec(v, dim);
  rho /= rho.trace();
  return hermitian_part(rho);
}

}  // namespace

QMarkovModel::QMarkovModel(CMatrix hamiltonian, CMatrix coupling)
    : h_(std::move(hamiltonian)), l_(std::move(coupling)) {
  require(h_.rows() >= 1 && h_.rows() == h_.cols(), "H must be a non-empty square matrix");
  require(l_.rows() == h_.rows() && l_.cols() == h_.cols(), "L must have the shape of H");
  require(h_.allFinite() && l_.allFinite(), "model matrices must be finite");
  if (hermiticity_defect(h_) > kHermitianTol)
    fail(Errc::invalid_argument, "H is not Hermitian (defect " + std::to_string(hermiticity_defect(h_)) + ")");
  h_ = hermitian_part(h_);
}

DensityOperator::DensityOperator(CMatrix rho) : rho_(std::move(rho)) {
  require(rho_.rows() >= 1 && rho_.rows() == rho_.cols(), "density operator must be square");
  require(rho_.allFinite(), "density operator must be finite");
  require(hermiticity_defect(rho_) <= 1e-10, "density operator is not Hermitian");
  rho_ = hermitian_part(rho_);
  const double tr = rho_.trace().real();
  if (std::abs(tr - 1.0) > 1e-10) fail(Errc::invalid_argument, "density operator trace " + std::to_string(tr) + " != 1");
  if (min_eigenvalue() < -1e-10) fail(Errc::invalid_argument, "density operator has a negative eigenvalue");
}

DensityOperator DensityOperator::pure(const CVector& psi) {
  require(std::abs(psi.norm() - 1.0) <= 1e-10, "state vector must be normalised");
  return DensityOperator(psi * psi.adjoint());
}

DensityOperator DensityOperator::maximally_mixed(Index dim) {
  return DensityOperator(CMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityOperator DensityOperator::basis_state(Index dim, Index k) {
  require(k >= 0 && k < dim, "basis index out of range");
  CMatrix rho = CMatrix::Zero(dim, dim);
  rho(k, k) = 1.0;
  return DensityOperator(rho);
}

double DensityOperator::min_eigenvalue() const { return qio::min_eigenvalue(rho_); }

double DensityOperator::max_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(rho_.rows() - 1);
}

Index Superoperator::dim() const { return static_cast<Index>(std::lround(std::sqrt(double(matrix.rows())))); }

CMatrix Superoperator::apply(const CMatrix& x) const {
  require(x.rows() == dim() && x.cols() == dim(), "operand shape does not match superoperator");
  return unvec(matrix * vec(x), dim());
}

Superoperator lindblad_generator(const QMarkovModel& model, Picture picture) {
  const Index d = model.dim();
  const CMatrix id = CMatrix::Identity(d, d);
  const CMatrix& h = model.H();
  const CMatrix& l = model.L();
  const CMatrix ldl = l.adjoint() * l;
  Superoperator out;
  out.picture = picture;
  if (picture == Picture::schrodinger) {
    out.matrix = kI * (kron(CMatrix(h.transpose()), id) - kron(id, h)) + kron(CMatrix(l.conjugate()), l) -
                 0.5 * kron(id, ldl) - 0.5 * kron(CMatrix(ldl.transpose()), id);
  } else {
    out.matrix = kI * (kron(id, h) - kron(CMatrix(h.transpose()), id)) + kron(CMatrix(l.transpose()), CMatrix(l.adjoint())) -
                 0.5 * kron(id, ldl) - 0.5 * kron(CMatrix(ldl.transpose()), id);
  }
  return out;
}

DensityOperator stationary_state(const QMarkovModel& model) {
  const Superoperator gen = lindblad_generator(model, Picture::schrodinger);
  const NullSpace ns = generator_null_space(gen.matrix);
  if (ns.dimension != 1)
    fail(Errc::non_unique_stationary_state,
         "generator kernel has dimension " + std::to_string(ns.dimension));
  return DensityOperator(density_from_null_vector(ns.vector, model.dim()));
}

bool is_full_rank(const DensityOperator& rho) {
  return rho.min_eigenvalue() > kFullRankTol * rho.max_eigenvalue();
}

DensityOperator ergodic_stationary_state(const QMarkovModel& model) {
  try {
    DensityOperator rho = stationary_state(model);
    if (!is_full_rank(rho)) fail(Errc::not_ergodic, "stationary state is not full rank");
    return rho;
  } catch (const Error& e) {
    if (e.code() == Errc::non_unique_stationary_state) fail(Errc::not_ergodic, e.what());
    throw;
  }
}

SpectralInfo spectral_info(const QMarkovModel& model) {
  const Superoperator gen = lindblad_generator(model, Picture::schrodinger);
  Eigen::ComplexEigenSolver<CMatrix> es(gen.matrix, false);
  SpectralInfo info;
  const CVector& ev = es.eigenvalues();
  info.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  const double radius = ev.cwiseAbs().maxCoeff();
  const double tol = 1e-9 * std::max(1.0, radius);
  double top = -std::numeric_limits<double>::infinity();
  for (const cplx& z : info.eigenvalues)
    if (std::abs(z) > tol) top = std::max(top, z.real());
  info.gap = std::isfinite(top) ? std::max(0.0, -top) : 0.0;

  const NullSpace ns = generator_null_space(gen.matrix);
  info.is_unique = ns.dimension == 1;
  if (info.is_unique) {
    const CMatrix rho = density_from_null_vector(ns.vector, model.dim());
    info.is_ergodic = is_full_rank(DensityOperator(rho));
  }
  return info;
}

CMatrix zero_mean_inverse(const QMarkovModel& model, const DensityOperator& rho_ss, const CMatrix& x) {
  const Index d = model.dim();
  require(x.rows() == d && x.cols() == d, "operand shape does not match model");
  const cplx mean = (rho_ss.matrix() * x).trace();
  if (std::abs(mean) > 1e-8)
    fail(Errc::not_zero_mean, "Tr(rho_ss X) = " + std::to_string(std::abs(mean)));
  const Superoperator gen = lindblad_generator(model, Picture::heisenberg);
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(gen.matrix);
  cod.setThreshold(1e-12);
  CMatrix a = unvec(cod.solve(vec(x)), d);
  const cplx shift = (rho_ss.matrix() * a).trace();
  a -= shift * CMatrix::Identity(d, d);
  return a;
}

CMatrix zero_mean_inverse(const QMarkovModel& model, const CMatrix& x) {
  return zero_mean_inverse(model, ergodic_stationary_state(model), x);
}

}  // namespace qio
