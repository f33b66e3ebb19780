#include <algorithm>
#include <cmath>

#include "qio/error.hpp"
#include "qio/estimation.hpp"
#include "qio/parallel.hpp"

namespace qio {

std::size_t stat_total_counts(const CountingRecord& record) { return record.jumps.size(); }

Vector stat_binned_counts(const CountingRecord& record, Index bins) {
  require(bins >= 1, "need at least one bin");
  Vector counts = Vector::Zero(bins);
  for (double t : record.jumps) {
    Index b = static_cast<Index>(std::ceil(t / record.horizon * static_cast<double>(bins))) - 1;
    counts(std::clamp<Index>(b, 0, bins - 1)) += 1.0;
  }
  return counts;
}

double stat_two_time_corr(const DiffusiveRecord& record, const std::function<double(double)>& kernel) {
  const auto& y = record.increments;
  const std::size_t n = y.size();
  double total = 0.0;
  for (std::size_t lag = 1; lag < n; ++lag) {
    const double k = kernel(static_cast<double>(lag) * record.dt);
    if (k == 0.0) continue;
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += y[i] * y[i + lag];
    total += k * s;
  }
  return total;
}

double stat_two_time_corr_exponential(const DiffusiveRecord& record, double rate) {
  const double decay = std::exp(-rate * record.dt);
  double acc = 0.0, total = 0.0;
  for (std::size_t j = 1; j < record.increments.size(); ++j) {
    acc = decay * (acc + record.increments[j - 1]);
    total += acc * record.increments[j];
  }
  return total;
}

CountingMoments counting_rate_and_variance(const QMarkovModel& model) {
  if (model.L().cwiseAbs().maxCoeff() == 0.0) return {};
  const DensityOperator rho = ergodic_stationary_state(model);
  const CMatrix& l = model.L();
  const Index d = model.dim();
  const CMatrix ldl = l.adjoint() * l;
  CountingMoments out;
  out.mu = (rho.matrix() * ldl).trace().real();
  const CMatrix a = zero_mean_inverse(model, rho, ldl - out.mu * CMatrix::Identity(d, d));
  out.V = (rho.matrix() * (ldl - 2.0 * l.adjoint() * a * l)).trace().real();
  if (out.V < -1e-8) fail(Errc::invalid_argument, "counting variance is negative (" + std::to_string(out.V) + ")");
  out.V = std::max(out.V, 0.0);
  return out;
}

double counting_fisher(const ParameterFamily& family, double theta, double h) {
  require(family.k() == 1, "counting_fisher needs a one-parameter family");
  if (h <= 0.0) h = 1e-4 * std::max(1.0, std::abs(theta));
  const Vector t0 = Vector::Constant(1, theta);
  require(family.domain().contains(Vector::Constant(1, theta - h), 1e-12) &&
              family.domain().contains(Vector::Constant(1, theta + h), 1e-12),
          "theta +- h must lie in the domain");
  const CountingMoments m0 = counting_rate_and_variance(family.model(t0));
  if (m0.V <= 1e-14) fail(Errc::zero_variance, "counting variance vanishes at theta");
  const double up = counting_rate_and_variance(family.model(Vector::Constant(1, theta + h))).mu;
  const double down = counting_rate_and_variance(family.model(Vector::Constant(1, theta - h))).mu;
  const double dmu = (up - down) / (2.0 * h);
  return dmu * dmu / m0.V;
}

McFisherResult mc_classical_fisher(const ParameterFamily& family, double theta, const DensityOperator& rho0,
                                   const McFisherOptions& options) {
  require(family.k() == 1, "mc_classical_fisher needs a one-parameter family");
  require(options.n_traj >= 2, "need at least two trajectories");
  const double h = options.h > 0.0 ? options.h : 1e-4 * std::max(1.0, std::abs(theta));
  const QMarkovModel center = family.model(Vector::Constant(1, theta));
  const QMarkovModel up = family.model(Vector::Constant(1, theta + h));
  const QMarkovModel down = family.model(Vector::Constant(1, theta - h));
  const RecordSimulator sim = options.kind == ReferenceKind::poisson
                                  ? counting_simulator(rho0, options.T, options.dt, options.scheme)
                                  : homodyne_simulator(rho0, options.T, options.dt);
  FilterOptions filter;
  filter.dt = options.dt;
  filter.keep_every = 0;
  std::vector<double> scores(options.n_traj);
  parallel_for(options.n_traj, [&](std::size_t i) {
    const MeasurementRecord rec = sim(center, options.seed, i);
    scores[i] = (log_likelihood(up, rho0, rec, filter) - log_likelihood(down, rho0, rec, filter)) / (2.0 * h);
  });
  const double n = static_cast<double>(scores.size());
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double s : scores) {
    const double c = (s - mean) * (s - mean);
    m2 += c;
    m4 += c * c;
  }
  McFisherResult out;
  out.fisher = m2 / (n - 1.0);
  out.standard_error = std::sqrt(std::max(0.0, m4 / n - (m2 / n) * (m2 / n)) / n);
  out.mean_score = mean;
  out.mean_score_se = std::sqrt(out.fisher / n);
  return out;
}

}  // namespace qio
