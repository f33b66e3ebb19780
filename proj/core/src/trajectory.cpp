#include "qio/trajectory.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "kraus_step.hpp"
#include "qio/error.hpp"
#include "qio/random.hpp"

namespace qio {

namespace {

Index grid_length(double T, double dt) {
  require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
  require(T > 0.0 && std::isfinite(T), "T must be positive");
  require(dt <= T * (1.0 + 1e-12), "dt must not exceed T");
  return std::max<Index>(1, static_cast<Index>(std::llround(T / dt)));
}

void check_initial_state(const QMarkovModel& model, const DensityOperator& rho0) {
  require(rho0.dim() == model.dim(), "initial state dimension does not match the model");
}

/// exp(-K t) for K = iH + L^dag L / 2, through an eigendecomposition when it
/// is well conditioned and the matrix exponential otherwise.
class NoJumpPropagator {
 public:
  explicit NoJumpPropagator(const QMarkovModel& model)
      : k_(kI * model.H() + 0.5 * model.L().adjoint() * model.L()) {
    Eigen::ComplexEigenSolver<CMatrix> es(k_);
    const CMatrix& v = es.eigenvectors();
    Eigen::JacobiSVD<CMatrix> svd(v);
    const Vector& s = svd.singularValues();
    if (s(s.size() - 1) > 1e-8 * s(0)) {
      v_ = v;
      vinv_ = v.inverse();
      lambda_ = es.eigenvalues();
      const CMatrix rebuilt = v_ * lambda_.asDiagonal() * vinv_;
      diagonal_ = (rebuilt - k_).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, k_.cwiseAbs().maxCoeff());
    }
  }

  CMatrix operator()(double t) const {
    if (diagonal_) {
      const CVector e = (-lambda_ * t).array().exp().matrix();
      return v_ * e.asDiagonal() * vinv_;
    }
    return CMatrix(-k_ * t).exp();
  }

 private:
  CMatrix k_;
  CMatrix v_;
  CMatrix vinv_;
  CVector lambda_;
  bool diagonal_ = false;
};

double survival(const NoJumpPropagator& g, const CMatrix& rho, double t) {
  const CMatrix gt = g(t);
  return (gt * rho * gt.adjoint()).trace().real();
}

void keep(FilterTrajectory& traj, std::size_t every, std::size_t k, double t, const CMatrix& rho) {
  if (every == 0 || k % every != 0) return;
  traj.times.push_back(t);
  traj.states.push_back(rho);
}

std::pair<CountingRecord, FilterTrajectory> counting_bernoulli(const QMarkovModel& model, const CMatrix& rho0,
                                                               double T, double dt, RandomStream& rng,
                                                               std::size_t every) {
  const Index n = grid_length(T, dt);
  const double h = T / static_cast<double>(n);
  const detail::StepKit kit(model, h);
  CountingRecord rec;
  rec.horizon = T;
  FilterTrajectory traj;
  CMatrix rho = rho0;
  keep(traj, every, 0, 0.0, rho);
  for (Index k = 0; k < n; ++k) {
    CMatrix sigma = kit.drift(rho);
    traj.loglik += h + std::log(detail::normalize_state(sigma));
    const double rate = kit.jump_rate(sigma);
    if (rng.uniform() < rate * h) {
      rho = kit.jump(sigma);
      traj.loglik += std::log(detail::normalize_state(rho));
      rec.jumps.push_back(k + 1 == n ? T : static_cast<double>(k + 1) * h);
    } else {
      rho = std::move(sigma);
    }
    keep(traj, every, static_cast<std::size_t>(k + 1), static_cast<double>(k + 1) * h, rho);
  }
  traj.final_state = rho;
  return {std::move(rec), std::move(traj)};
}

std::pair<CountingRecord, FilterTrajectory> counting_waiting_time(const QMarkovModel& model, const CMatrix& rho0,
                                                                  double T, RandomStream& rng, std::size_t every) {
  const NoJumpPropagator g(model);
  const CMatrix& l = model.L();
  CountingRecord rec;
  rec.horizon = T;
  FilterTrajectory traj;
  CMatrix rho = rho0;
  keep(traj, every, 0, 0.0, rho);
  double t = 0.0;
  traj.loglik = T;
  while (true) {
    const double u = rng.uniform();
    const double remaining = T - t;
    const double s_end = survival(g, rho, remaining);
    if (s_end > u || remaining <= 0.0) {
      const CMatrix gt = g(remaining);
      rho = gt * rho * gt.adjoint();
      traj.loglik += std::log(detail::normalize_state(rho));
      break;
    }
    double lo = 0.0, hi = remaining;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, T); ++it) {
      const double mid = 0.5 * (lo + hi);
      (survival(g, rho, mid) > u ? lo : hi) = mid;
    }
    const double tau = hi;
    const CMatrix gt = g(tau);
    rho = gt * rho * gt.adjoint();
    traj.loglik += std::log(detail::normalize_state(rho));
    rho = l * rho * l.adjoint();
    const double w = detail::normalize_state(rho);
    traj.loglik += std::log(w);
    double tj = std::min(T, t + tau);
    if (!rec.jumps.empty() && tj <= rec.jumps.back()) tj = std::nextafter(rec.jumps.back(), T + 1.0);
    if (tj > T) break;
    rec.jumps.push_back(tj);
    t = tj;
    keep(traj, every, rec.jumps.size(), t, rho);
  }
  traj.final_state = rho;
  return {std::move(rec), std::move(traj)};
}

}  // namespace

void check_step(const QMarkovModel& model, double dt) {
  const double norm = Eigen::JacobiSVD<CMatrix>(model.L()).singularValues()(0);
  if (dt * norm * norm > kStepGuard)
    fail(Errc::step_too_large, "dt * ||L||^2 = " + std::to_string(dt * norm * norm) + " exceeds " +
                                   std::to_string(kStepGuard));
}

std::pair<DiffusiveRecord, FilterTrajectory> simulate_homodyne(const QMarkovModel& model,
                                                               const DensityOperator& rho0, double T,
                                                               double dt, std::uint64_t seed,
                                                               const SimulationOptions& options) {
  check_initial_state(model, rho0);
  const Index n = grid_length(T, dt);
  check_step(model, dt);
  RandomStream rng(seed, options.stream);
  const detail::StepKit kit(model, dt);
  const double sq = std::sqrt(dt);
  DiffusiveRecord rec;
  rec.dt = dt;
  rec.increments.reserve(static_cast<std::size_t>(n));
  FilterTrajectory traj;
  CMatrix rho = rho0.matrix();
  keep(traj, options.keep_every, 0, 0.0, rho);
  for (Index k = 0; k < n; ++k) {
    const double dy = sq * rng.normal() + kit.homodyne_mean(rho) * dt;
    rec.increments.push_back(dy);
    rho = kit.diffusive(rho, dy);
    traj.loglik += std::log(detail::normalize_state(rho));
    keep(traj, options.keep_every, static_cast<std::size_t>(k + 1), static_cast<double>(k + 1) * dt, rho);
  }
  traj.final_state = rho;
  return {std::move(rec), std::move(traj)};
}

std::pair<CountingRecord, FilterTrajectory> simulate_counting(const QMarkovModel& model,
                                                              const DensityOperator& rho0, double T,
                                                              double dt, std::uint64_t seed,
                                                              const SimulationOptions& options) {
  check_initial_state(model, rho0);
  grid_length(T, dt);
  RandomStream rng(seed, options.stream);
  if (options.counting_scheme == CountingScheme::waiting_time)
    return counting_waiting_time(model, rho0.matrix(), T, rng, options.keep_every);
  check_step(model, dt);
  return counting_bernoulli(model, rho0.matrix(), T, dt, rng, options.keep_every);
}

MeasurementRecord simulate_reference(ReferenceKind kind, double lambda, double T, double dt,
                                     std::uint64_t seed, std::uint64_t stream) {
  RandomStream rng(seed, stream);
  if (kind == ReferenceKind::wiener) {
    const Index n = grid_length(T, dt);
    DiffusiveRecord rec;
    rec.dt = dt;
    rec.increments.resize(static_cast<std::size_t>(n));
    const double sq = std::sqrt(dt);
    for (double& v : rec.increments) v = sq * rng.normal();
    return rec;
  }
  require(lambda > 0.0 && std::isfinite(lambda), "Poisson intensity must be positive");
  require(T > 0.0 && std::isfinite(T), "T must be positive");
  CountingRecord rec;
  rec.horizon = T;
  std::exponential_distribution<double> gap(lambda);
  double t = gap(rng.engine());
  while (t <= T) {
    if (t > 0.0 && (rec.jumps.empty() || t > rec.jumps.back())) rec.jumps.push_back(t);
    t += gap(rng.engine());
  }
  return rec;
}

}  // namespace qio
