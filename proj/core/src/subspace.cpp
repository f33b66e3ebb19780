#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "qio/error.hpp"
#include "qio/linalg.hpp"
#include "qio/riccati.hpp"
#include "qio/sysid.hpp"

namespace qio {

namespace {

/// Block Hankel matrix with `rows` block rows, starting at sample `first`.
Matrix block_hankel(const Matrix& x, Index first, Index rows, Index cols) {
  const Index m = x.rows();
  Matrix h(rows * m, cols);
  for (Index r = 0; r < rows; ++r) h.middleRows(r * m, m) = x.middleCols(first + r, cols);
  return h;
}

/// Oblique projection of `future` onto `past` along `along`.
Matrix oblique_projection(const Matrix& future, const Matrix& past, const Matrix& along) {
  Matrix reg(past.rows() + along.rows(), past.cols());
  reg << past, along;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(reg.transpose());
  cod.setThreshold(1e-11);
  const Matrix theta = cod.solve(future.transpose()).transpose();
  return theta.leftCols(past.rows()) * past;
}

Matrix pinv(const Matrix& m) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(m);
  cod.setThreshold(1e-13);
  return cod.pseudoInverse();
}

}  // namespace

Index SysIdDataset::estimation_length() const {
  return static_cast<Index>(std::floor(split * static_cast<double>(size())));
}

void SysIdDataset::validate() const {
  require(dt > 0.0 && std::isfinite(dt), "dataset needs dt > 0");
  if (size() == 0) fail(Errc::insufficient_data, "dataset is empty");
  require(inputs.cols() == size(), "inputs and outputs must have equal length");
  require(split > 0.0 && split <= 1.0, "split must lie in (0, 1]");
  require(inputs.allFinite() && outputs.allFinite(), "dataset contains non-finite values");
  const Index ne = estimation_length();
  if (ne < 1 || (split < 1.0 && ne >= size()))
    fail(Errc::insufficient_data, "estimation and validation splits must both be non-empty");
}

SysIdDataset SysIdDataset::estimation() const {
  const Index ne = estimation_length();
  return SysIdDataset{dt, inputs.leftCols(ne), outputs.head(ne), 1.0};
}

SysIdDataset SysIdDataset::validation() const {
  const Index ne = estimation_length();
  return SysIdDataset{dt, inputs.rightCols(size() - ne), outputs.tail(size() - ne), 1.0};
}

DiscreteIdentification subspace_id_discrete(const SysIdDataset& data, Index order, Index horizon) {
  require(order >= 1, "order must be positive");
  require(horizon >= 2, "horizon must be at least 2");
  if (data.size() == 0) fail(Errc::insufficient_data, "dataset is empty");
  require(data.inputs.cols() == data.size(), "inputs and outputs must have equal length");
  const Index s = 2 * order;
  const Index i = horizon;
  const Index m = data.inputs.rows();
  const Index l = 1;
  const Index n_samples = data.size();
  if (n_samples < 10 * (2 * i) * s)
    fail(Errc::insufficient_data, "need at least " + std::to_string(10 * 2 * i * s) + " samples, have " +
                                      std::to_string(n_samples));
  if (s > i * l) fail(Errc::insufficient_data, "horizon too short for the requested order");
  const Matrix u = data.inputs;
  const Matrix y = data.outputs.transpose();
  const Index j = n_samples - 2 * i + 1;

  const Matrix uh = block_hankel(u, 0, 2 * i, j);
  const Matrix yh = block_hankel(y, 0, 2 * i, j);
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(uh * uh.transpose() / static_cast<double>(j), Eigen::EigenvaluesOnly);
    const Vector& ev = es.eigenvalues();
    if (!(ev(0) > 1e-10 * ev(ev.size() - 1))) fail(Errc::not_exciting, "inputs are not persistently exciting");
  }

  const Matrix up = uh.topRows(i * m), uf = uh.bottomRows(i * m);
  const Matrix yp = yh.topRows(i * l), yf = yh.bottomRows(i * l);
  Matrix wp(i * (m + l), j);
  wp << up, yp;
  const Matrix oi = oblique_projection(yf, wp, uf);

  Matrix wp_plus((i + 1) * (m + l), j);
  wp_plus << uh.topRows((i + 1) * m), yh.topRows((i + 1) * l);
  const Matrix oim1 = oblique_projection(yh.bottomRows((i - 1) * l), wp_plus, uh.bottomRows((i - 1) * m));

  Eigen::BDCSVD<Matrix> svd(oi, Eigen::ComputeThinU);
  DiscreteIdentification out;
  out.singular_values = svd.singularValues();
  out.states = s;
  const Vector sv = out.singular_values.head(s);
  if (!(sv(s - 1) > 0.0)) fail(Errc::not_exciting, "projection has rank below the requested order");
  const Matrix gamma = svd.matrixU().leftCols(s) * sv.cwiseSqrt().asDiagonal();
  const Matrix gamma_minus = gamma.topRows((i - 1) * l);

  DiscretePredictor& p = out.model;
  p.A = pinv(gamma_minus) * gamma.bottomRows((i - 1) * l);
  p.C = gamma.topRows(l);

  // B, D and the initial state by least squares on the output equation.
  const double radius = spectral_radius(p.A);
  if (!(radius < 1.0))
    fail(Errc::not_hurwitz, "identified discrete A is unstable (spectral radius " + std::to_string(radius) + ")");
  const Index np = s + s * m + l * m;
  Matrix phi = Matrix::Zero(n_samples, np);
  {
    Matrix x0 = Matrix::Identity(s, s);
    for (Index k = 0; k < n_samples; ++k) {
      phi.block(k, 0, 1, s) = p.C * x0;
      x0 = p.A * x0;
    }
    for (Index b = 0; b < s * m; ++b) {
      const Index row = b % s, col = b / s;
      Vector x = Vector::Zero(s);
      for (Index k = 0; k < n_samples; ++k) {
        phi(k, s + b) = (p.C * x)(0);
        x = p.A * x;
        x(row) += u(col, k);
      }
    }
    for (Index c = 0; c < m; ++c) phi.col(s + s * m + c) = u.row(c).transpose();
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(phi);
  const Vector theta = qr.solve(data.outputs);
  p.B = Eigen::Map<const Matrix>(theta.data() + s, s, m);
  p.D = Eigen::Map<const Matrix>(theta.data() + s + s * m, l, m);

  // Innovation gain from the residuals of the state sequences.
  const Matrix xi = pinv(gamma) * oi;
  const Matrix xi1 = pinv(gamma_minus) * oim1;
  const Matrix uii = uh.middleRows(i * m, m);
  const Matrix yii = yh.middleRows(i * l, l);
  const Matrix rw = xi1 - p.A * xi - p.B * uii;
  const Matrix rv = yii - p.C * xi - p.D * uii;
  const double jd = static_cast<double>(j);
  const Matrix qw = rw * rw.transpose() / jd;
  const Matrix sw = rw * rv.transpose() / jd;
  const Matrix rr = rv * rv.transpose() / jd;
  const double yvar = (y.array() - y.mean()).square().mean();
  p.K = Matrix::Zero(s, l);
  if (rr(0, 0) > 1e-14 * std::max(yvar, 1e-300)) {
    try {
      const Matrix pcov = solve_filter_dare(p.A, p.C, qw, sw, rr);
      p.K = (p.A * pcov * p.C.transpose() + sw) * (p.C * pcov * p.C.transpose() + rr).inverse();
    } catch (const Error&) {
      p.K = sw / rr(0, 0);
    }
  }
  return out;
}

SubspaceResult subspace_id(const SysIdDataset& data, Index order, Index horizon) {
  SubspaceResult out;
  out.discrete = subspace_id_discrete(data, order, horizon);
  const DiscretePredictor& p = out.discrete.model;
  out.continuous = continuous_from_sampled(p.A, p.B, p.C, data.dt);
  return out;
}

double fpe_value(double vn, Index parameters, Index samples) {
  require(parameters < samples, "FPE needs more samples than parameters");
  const double r = static_cast<double>(parameters) / static_cast<double>(samples);
  return vn * (1.0 + r) / (1.0 - r);
}

Index fpe_parameters(Index order, Index outputs, Index inputs) {
  return 2 * order * (2 * outputs + inputs) + outputs * inputs;
}

FpeResult fpe_order_select(const SysIdDataset& data, std::span<const Index> orders, Index horizon) {
  require(!orders.empty(), "need at least one candidate order");
  if (data.size() == 0) fail(Errc::insufficient_data, "dataset is empty");
  FpeResult res;
  const double yvar = (data.outputs.array() - data.outputs.mean()).square().mean();
  for (Index n : orders) {
    FpeEntry e;
    e.order = n;
    try {
      const DiscreteIdentification id = subspace_id_discrete(data, n, horizon);
      const Matrix yhat = predict_outputs(id.model, data.inputs, data.outputs.transpose());
      e.vn = (data.outputs - yhat.row(0).transpose()).squaredNorm() / static_cast<double>(data.size());
    } catch (const Error& err) {
      if (err.code() != Errc::not_hurwitz) throw;
      e.vn = std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(e.vn)) e.vn = std::numeric_limits<double>::infinity();
    if (e.vn <= 1e-20 * yvar) e.vn = 0.0;
    e.parameters = fpe_parameters(n, 1, data.inputs.rows());
    e.fpe = fpe_value(e.vn, e.parameters, data.size());
    res.table.push_back(e);
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < res.table.size(); ++k) {
    const FpeEntry& e = res.table[k];
    const FpeEntry& b = res.table[best];
    if (e.fpe < b.fpe || (e.fpe == b.fpe && e.order < b.order)) best = k;
  }
  res.best = res.table[best].order;
  return res;
}

double nmse(const Vector& y, const Vector& yhat) {
  require(y.size() == yhat.size() && y.size() > 0, "nmse needs equal non-empty vectors");
  const double den = (y.array() - y.mean()).square().sum();
  if (!(den > 0.0)) fail(Errc::degenerate_output, "validation output has zero variance");
  return (y - yhat).squaredNorm() / den;
}

double validate_nmse(const LinearQSystem& g, const Matrix& L_m, Quadrature quadrature, const SysIdDataset& data) {
  data.validate();
  const Index row = quadrature_row(quadrature);
  const DiscretePredictor p = sampled_predictor(g.A, g.B, g.C.row(row), g.D.row(row), L_m, data.dt);
  const Matrix yhat = predict_outputs(p, data.inputs, data.outputs.transpose());
  const Index ne = data.estimation_length();
  const Index nv = data.size() - ne;
  if (nv == 0) return nmse(data.outputs, yhat.row(0).transpose());
  return nmse(data.outputs.tail(nv), yhat.row(0).tail(nv).transpose());
}

}  // namespace qio
