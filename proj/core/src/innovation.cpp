#include <cmath>

#include <Eigen/Eigenvalues>

#include "qio/error.hpp"
#include "qio/linalg.hpp"
#include "qio/linear_system.hpp"
#include "qio/sampled.hpp"

namespace qio {

namespace {

void check_innovation_inputs(const LinearQSystem& g, const Matrix& L_m, const Matrix& inputs, double dt) {
  g.validate();
  require(L_m.rows() == 2 * g.n && L_m.cols() == 1, "L_m must be 2n x 1");
  require(inputs.rows() == 2 && inputs.cols() >= 1, "inputs must be 2 x N with N >= 1");
  require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
}

/// Symmetric square root of a PSD covariance (negative eigenvalues clipped).
Matrix psd_sqrt(const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

}  // namespace

InnovationSimulation simulate_innovation_form(const LinearQSystem& g, const Matrix& L_m, Quadrature quadrature,
                                              const Matrix& inputs, double dt, std::uint64_t seed,
                                              const InnovationOptions& options) {
  check_innovation_inputs(g, L_m, inputs, dt);
  const Index row = quadrature_row(quadrature);
  const Matrix cm = g.C.row(row);
  const Matrix dm = g.D.row(row);
  const Index s = 2 * g.n;
  const Index steps = inputs.cols();
  RandomStream rng(seed, options.stream);
  InnovationSimulation out;
  out.Y.dt = dt;
  out.Y.increments.resize(static_cast<std::size_t>(steps));
  out.z = Matrix::Zero(s, steps + 1);
  Vector z = Vector::Zero(s);

  if (options.scheme == InnovationScheme::euler) {
    const double rho = spectral_radius(g.A);
    if (dt * rho > 0.1)
      fail(Errc::step_too_large, "dt * spectral_radius(A) = " + std::to_string(dt * rho) + " exceeds 0.1");
    const double sq = std::sqrt(dt);
    for (Index k = 0; k < steps; ++k) {
      const double dnu = options.suppress_noise ? 0.0 : sq * rng.normal();
      const Vector f = inputs.col(k);
      out.Y.increments[static_cast<std::size_t>(k)] = (cm * z + dm * f)(0) * dt + dnu;
      z += (g.A * z + g.B * f) * dt + L_m.col(0) * dnu;
      out.z.col(k + 1) = z;
    }
    return out;
  }

  const ExactStep st = exact_innovation_step(g.A, g.B, cm, dm, L_m, dt);
  const Matrix root = psd_sqrt(st.cov);
  Vector xi(s + 1);
  for (Index k = 0; k < steps; ++k) {
    const Vector f = inputs.col(k);
    if (options.suppress_noise) {
      xi.setZero();
    } else {
      Vector w(s + 1);
      for (Index i = 0; i <= s; ++i) w(i) = rng.normal();
      xi = root * w;
    }
    out.Y.increments[static_cast<std::size_t>(k)] = (st.Cy * z + st.Dy * f)(0) + xi(s);
    z = st.Az * z + st.Bz * f + xi.head(s);
    out.z.col(k + 1) = z;
  }
  return out;
}

Vector kalman_innovations(const LinearQSystem& g, const Matrix& L_m, Quadrature quadrature, const Matrix& inputs,
                          const DiffusiveRecord& Y) {
  check_innovation_inputs(g, L_m, inputs, Y.dt);
  require(static_cast<Index>(Y.increments.size()) == inputs.cols(), "record and inputs differ in length");
  const Index row = quadrature_row(quadrature);
  const Matrix cm = g.C.row(row);
  const Matrix dm = g.D.row(row);
  Vector zhat = Vector::Zero(2 * g.n);
  Vector e(inputs.cols());
  for (Index k = 0; k < inputs.cols(); ++k) {
    const Vector f = inputs.col(k);
    e(k) = Y.increments[static_cast<std::size_t>(k)] - (cm * zhat + dm * f)(0) * Y.dt;
    zhat += (g.A * zhat + g.B * f) * Y.dt + L_m.col(0) * e(k);
  }
  return e;
}

}  // namespace qio
