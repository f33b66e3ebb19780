#include "qio/filter.hpp"

#include <cmath>
#include <limits>

#include "kraus_step.hpp"
#include "qio/error.hpp"
#include "qio/linalg.hpp"
#include "qio/trajectory.hpp"

namespace qio {

namespace {

constexpr double kZeroRate = 1e-14;
constexpr double kMinTrace = 1e-100;
constexpr double kMaxTrace = 1e100;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_inputs(const QMarkovModel& model, const DensityOperator& rho0, const MeasurementRecord& record,
                  const FilterOptions& options) {
  require(rho0.dim() == model.dim(), "initial state dimension does not match the model");
  validate(record);
  require(options.lambda > 0.0 && std::isfinite(options.lambda), "reference intensity must be positive");
  if (const auto* d = std::get_if<DiffusiveRecord>(&record)) {
    check_step(model, d->dt);
  } else {
    require(options.dt > 0.0, "counting integration step must be positive");
    check_step(model, std::min(options.dt, std::get<CountingRecord>(record).horizon));
  }
}

bool stored(std::size_t every, std::size_t k) { return every != 0 && k % every == 0; }

/// Normalised counting filter. On a zero-rate jump it throws when `strict`,
/// otherwise it stops and reports -inf.
FilterTrajectory filter_counting(const QMarkovModel& model, const CMatrix& rho0, const CountingRecord& rec,
                                 const FilterOptions& options, bool strict) {
  const detail::CountingGrid grid = detail::counting_grid(rec.horizon, rec.jumps, options.dt);
  const detail::StepKit kit(model, grid.dt);
  const double log_lambda = std::log(options.lambda);
  FilterTrajectory traj;
  CMatrix rho = rho0;
  if (stored(options.keep_every, 0)) {
    traj.times.push_back(0.0);
    traj.states.push_back(rho);
  }
  std::size_t next = 0;
  for (Index k = 0; k < grid.steps; ++k) {
    rho = kit.drift(rho);
    traj.loglik += options.lambda * grid.dt + std::log(detail::normalize_state(rho));
    while (next < grid.jump_steps.size() && grid.jump_steps[next] == k) {
      const double rate = kit.jump_rate(rho);
      if (rate <= kZeroRate) {
        if (strict)
          fail(Errc::zero_jump_rate, "jump at t = " + std::to_string(rec.jumps[next]) +
                                         " while Tr(L^dag L rho_c) = " + std::to_string(rate));
        if (!(kit.jump(rho).trace().real() > 0.0)) {
          traj.loglik = kNegInf;
          traj.final_state = rho;
          return traj;
        }
      }
      rho = kit.jump(rho);
      traj.loglik += std::log(detail::normalize_state(rho)) - log_lambda;
      ++next;
    }
    if (stored(options.keep_every, static_cast<std::size_t>(k + 1))) {
      traj.times.push_back(static_cast<double>(k + 1) * grid.dt);
      traj.states.push_back(rho);
    }
  }
  traj.final_state = rho;
  return traj;
}

FilterTrajectory filter_diffusive(const QMarkovModel& model, const CMatrix& rho0, const DiffusiveRecord& rec,
                                  const FilterOptions& options) {
  const detail::StepKit kit(model, rec.dt);
  FilterTrajectory traj;
  CMatrix rho = rho0;
  if (stored(options.keep_every, 0)) {
    traj.times.push_back(0.0);
    traj.states.push_back(rho);
  }
  for (std::size_t k = 0; k < rec.increments.size(); ++k) {
    rho = kit.diffusive(rho, rec.increments[k]);
    traj.loglik += std::log(detail::normalize_state(rho));
    if (stored(options.keep_every, k + 1)) {
      traj.times.push_back(static_cast<double>(k + 1) * rec.dt);
      traj.states.push_back(rho);
    }
  }
  traj.final_state = rho;
  return traj;
}

/// Unnormalised state with a separately tracked log scale.
struct ScaledState {
  CMatrix rho;
  double log_scale = 0.0;
  bool dead = false;

  void rescale() {
    if (dead) return;
    const double tr = rho.trace().real();
    if (!(tr > 0.0)) {
      dead = true;
      rho.setZero();
      return;
    }
    if (tr < kMinTrace || tr > kMaxTrace) {
      rho /= tr;
      log_scale += std::log(tr);
    }
  }

  double logtrace() const { return dead ? kNegInf : log_scale + std::log(rho.trace().real()); }
};

void store(ZakaiTrajectory& z, double t, const ScaledState& s) {
  z.times.push_back(t);
  z.states.push_back(s.rho);
  z.log_scale.push_back(s.dead ? kNegInf : s.log_scale);
  z.logtrace.push_back(s.logtrace());
}

/// Superoperator powers P^(2^j), each stored as exp(scale_j) * Q_j.
class CountingPropagator {
 public:
  CountingPropagator(const QMarkovModel& model, double dt, double lambda, Index max_steps) {
    const CMatrix m0 = detail::StepKit(model, dt).m0();
    CMatrix p = kron(CMatrix(m0.conjugate()), m0);
    double scale = lambda * dt;
    normalise(p, scale);
    powers_.push_back(p);
    scales_.push_back(scale);
    for (Index span = 2; span <= max_steps; span *= 2) {
      p = p * p;
      scale *= 2.0;
      normalise(p, scale);
      powers_.push_back(p);
      scales_.push_back(scale);
    }
  }

  /// v <- P^m v, returning the accumulated log scale.
  double apply(CVector& v, Index m, Index dim) const {
    double log_scale = 0.0;
    for (std::size_t j = 0; m > 0; ++j, m >>= 1) {
      if ((m & 1) == 0) continue;
      v = powers_[j] * v;
      log_scale += scales_[j];
      const double tr = trace_of(v, dim);
      if (!(tr > 0.0)) return kNegInf;
      v /= tr;
      log_scale += std::log(tr);
    }
    return log_scale;
  }

  static double trace_of(const CVector& v, Index dim) {
    double tr = 0.0;
    for (Index i = 0; i < dim; ++i) tr += v(i * (dim + 1)).real();
    return tr;
  }

 private:
  static void normalise(CMatrix& p, double& scale) {
    const double m = p.cwiseAbs().maxCoeff();
    if (m > 0.0) {
      p /= m;
      scale += std::log(m);
    }
  }

  std::vector<CMatrix> powers_;
  std::vector<double> scales_;
};

double counting_log_likelihood_fast(const QMarkovModel& model, const CMatrix& rho0, const CountingRecord& rec,
                                    const FilterOptions& options) {
  const detail::CountingGrid grid = detail::counting_grid(rec.horizon, rec.jumps, options.dt);
  const Index d = model.dim();
  const CountingPropagator prop(model, grid.dt, options.lambda, grid.steps);
  const CMatrix& l = model.L();
  const double log_lambda = std::log(options.lambda);
  CVector v = vec(rho0);
  double total = 0.0;
  Index cursor = 0;
  std::size_t next = 0;
  while (next < grid.jump_steps.size()) {
    const Index step = grid.jump_steps[next];
    total += prop.apply(v, step + 1 - cursor, d);
    if (!std::isfinite(total)) return kNegInf;
    cursor = step + 1;
    while (next < grid.jump_steps.size() && grid.jump_steps[next] == step) {
      const CMatrix rho = unvec(v, d);
      v = vec(CMatrix(l * rho * l.adjoint()));
      const double tr = CountingPropagator::trace_of(v, d);
      if (!(tr > 0.0)) return kNegInf;
      v /= tr;
      total += std::log(tr) - log_lambda;
      ++next;
    }
  }
  total += prop.apply(v, grid.steps - cursor, d);
  return total;
}

}  // namespace

FilterTrajectory run_filter(const QMarkovModel& model, const DensityOperator& rho0, const MeasurementRecord& record,
                            const FilterOptions& options) {
  check_inputs(model, rho0, record, options);
  if (const auto* d = std::get_if<DiffusiveRecord>(&record))
    return filter_diffusive(model, rho0.matrix(), *d, options);
  return filter_counting(model, rho0.matrix(), std::get<CountingRecord>(record), options, true);
}

ZakaiTrajectory run_zakai(const QMarkovModel& model, const DensityOperator& rho0, const MeasurementRecord& record,
                          const FilterOptions& options) {
  check_inputs(model, rho0, record, options);
  ZakaiTrajectory z;
  ScaledState s{rho0.matrix()};
  if (stored(options.keep_every, 0)) store(z, 0.0, s);
  if (const auto* rec = std::get_if<DiffusiveRecord>(&record)) {
    const detail::StepKit kit(model, rec->dt);
    for (std::size_t k = 0; k < rec->increments.size(); ++k) {
      if (!s.dead) {
        s.rho = kit.diffusive(s.rho, rec->increments[k]);
        s.rescale();
      }
      if (stored(options.keep_every, k + 1)) store(z, static_cast<double>(k + 1) * rec->dt, s);
    }
  } else {
    const auto& crec = std::get<CountingRecord>(record);
    const detail::CountingGrid grid = detail::counting_grid(crec.horizon, crec.jumps, options.dt);
    const detail::StepKit kit(model, grid.dt);
    const double growth = std::exp(options.lambda * grid.dt);
    std::size_t next = 0;
    for (Index k = 0; k < grid.steps; ++k) {
      if (!s.dead) {
        s.rho = growth * kit.drift(s.rho);
        s.rescale();
      }
      while (next < grid.jump_steps.size() && grid.jump_steps[next] == k) {
        if (!s.dead) {
          s.rho = kit.jump(s.rho) / options.lambda;
          s.rescale();
        }
        ++next;
      }
      if (stored(options.keep_every, static_cast<std::size_t>(k + 1)))
        store(z, static_cast<double>(k + 1) * grid.dt, s);
    }
  }
  z.final_state = s.rho;
  z.final_logtrace = s.logtrace();
  return z;
}

double log_likelihood(const QMarkovModel& model, const DensityOperator& rho0, const MeasurementRecord& record,
                      const FilterOptions& options) {
  if (std::holds_alternative<CountingRecord>(record)) {
    check_inputs(model, rho0, record, options);
    return counting_log_likelihood_fast(model, rho0.matrix(), std::get<CountingRecord>(record), options);
  }
  FilterOptions quiet = options;
  quiet.keep_every = 0;
  return run_zakai(model, rho0, record, quiet).final_logtrace;
}

double counting_loglik_accumulation(const QMarkovModel& model, const DensityOperator& rho0,
                                    const CountingRecord& record, const FilterOptions& options) {
  check_inputs(model, rho0, record, options);
  FilterOptions quiet = options;
  quiet.keep_every = 0;
  return filter_counting(model, rho0.matrix(), record, quiet, false).loglik;
}

double counting_loglik_continuous(const QMarkovModel& model, const DensityOperator& rho0,
                                  const CountingRecord& record, const FilterOptions& options) {
  check_inputs(model, rho0, record, options);
  const detail::CountingGrid grid = detail::counting_grid(record.horizon, record.jumps, options.dt);
  const detail::StepKit kit(model, grid.dt);
  CMatrix rho = rho0.matrix();
  double total = 0.0;
  std::size_t next = 0;
  for (Index k = 0; k < grid.steps; ++k) {
    total += (options.lambda - kit.jump_rate(rho)) * grid.dt;
    rho = kit.drift(rho);
    detail::normalize_state(rho);
    while (next < grid.jump_steps.size() && grid.jump_steps[next] == k) {
      const double rate = kit.jump_rate(rho);
      if (!(rate > 0.0)) return kNegInf;
      total += std::log(rate / options.lambda);
      rho = kit.jump(rho);
      detail::normalize_state(rho);
      ++next;
    }
  }
  return total;
}

double girsanov_loglik(const QMarkovModel& model, const DensityOperator& rho0, const DiffusiveRecord& record) {
  check_inputs(model, rho0, record, {});
  const detail::StepKit kit(model, record.dt);
  CMatrix rho = rho0.matrix();
  double total = 0.0;
  for (double dy : record.increments) {
    const double m = kit.homodyne_mean(rho);
    total += m * dy - 0.5 * m * m * record.dt;
    rho = kit.diffusive(rho, dy);
    detail::normalize_state(rho);
  }
  return total;
}

}  // namespace qio
