#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qio/family.hpp"
#include "qio/filter.hpp"
#include "qio/random.hpp"
#include "qio/records.hpp"
#include "qio/trajectory.hpp"

namespace qio {

struct MaximizeOptions {
  /// Grid points per axis (reduced to 5 when k > 2).
  Index grid_points = 21;
  int max_iterations = 400;
  double x_tolerance = 1e-8;
  double f_tolerance = 1e-10;
};

struct MaximizeResult {
  Vector argmax;
  double value = 0.0;
  /// True when every grid value agrees to 1e-12 (relative); no refinement is
  /// run and argmax is the first grid point.
  bool flat = false;
  Index evaluations = 0;
};

/// Grid search over the box followed by Nelder-Mead refinement (evaluations
/// are clamped into the box) from the best grid point. Ties go to the lowest
/// grid index. Throws Errc::all_records_impossible when every grid value is -inf.
MaximizeResult maximize_on_box(const std::function<double(const Vector&)>& objective, const Box& box,
                               const MaximizeOptions& options = {});

/// Sum of log-likelihoods over records at model(theta).
double total_log_likelihood(const ParameterFamily& family, const Vector& theta,
                            std::span<const MeasurementRecord> records, const DensityOperator& rho0,
                            const FilterOptions& filter = {});

struct MleOptions {
  MaximizeOptions search;
  FilterOptions filter;
};

MaximizeResult mle(const ParameterFamily& family, std::span<const MeasurementRecord> records,
                   const DensityOperator& rho0, const MleOptions& options = {});

struct PosteriorGrid {
  std::vector<Vector> grid;
  std::vector<double> log_weights;
  std::vector<double> weights;
  Vector pm;
  Vector map;
};

/// Regular grid with `points` nodes per axis (one node on degenerate axes).
std::vector<Vector> regular_grid(const Box& box, Index points);

/// Posterior weights proportional to exp(loglik) * prior on the supplied grid.
/// Throws Errc::degenerate_posterior when every weight vanishes.
PosteriorGrid posterior_grid(const ParameterFamily& family, std::span<const MeasurementRecord> records,
                             const DensityOperator& rho0, const std::vector<Vector>& grid,
                             const std::vector<double>& prior, const FilterOptions& filter = {});

using PriorSampler = std::function<Vector(RandomStream&)>;
using RecordSimulator = std::function<MeasurementRecord(const QMarkovModel&, std::uint64_t seed, std::uint64_t stream)>;
using StatisticFn = std::function<Vector(const MeasurementRecord&)>;

struct AbcOptions {
  std::size_t n_sims = 1000;
  double epsilon = 1.0;
  std::uint64_t seed = 0;
  /// Prior-predictive simulations used to standardise statistic components.
  std::size_t pilot = 100;
};

struct AbcResult {
  std::vector<Vector> accepted;
  std::vector<double> distances;
  Vector scale;
  std::size_t n_sims = 0;
  /// Set when nothing was accepted (reported, not thrown).
  bool no_acceptances = false;
};

AbcResult abc_rejection(const ParameterFamily& family, const Vector& observed, const PriorSampler& prior,
                        const RecordSimulator& simulate, const StatisticFn& statistic, const AbcOptions& options);

/// Simulators that draw a record of length T from the model.
RecordSimulator counting_simulator(const DensityOperator& rho0, double T, double dt,
                                   CountingScheme scheme = CountingScheme::bernoulli);
RecordSimulator homodyne_simulator(const DensityOperator& rho0, double T, double dt);

std::size_t stat_total_counts(const CountingRecord& record);
/// Counts in `bins` equal time bins.
Vector stat_binned_counts(const CountingRecord& record, Index bins);
/// sum_{i<j} k((j - i) dt) dY_i dY_j.
double stat_two_time_corr(const DiffusiveRecord& record, const std::function<double(double)>& kernel);
/// Same statistic for k(tau) = exp(-rate tau) in O(n).
double stat_two_time_corr_exponential(const DiffusiveRecord& record, double rate);

struct CountingMoments {
  double mu = 0.0;
  double V = 0.0;
};

/// Stationary counting rate mu = Tr(rho_ss L^dag L) and asymptotic variance
/// V = Re Tr[rho_ss (L^dag L - 2 L^dag A L)], A = zero_mean_inverse(L^dag L - mu I).
/// A model with L = 0 returns (0, 0). Throws Errc::not_ergodic.
CountingMoments counting_rate_and_variance(const QMarkovModel& model);

/// mu'(theta)^2 / V(theta) with a central difference of step h (h <= 0 picks
/// 1e-4 * max(1, |theta|)). Throws Errc::zero_variance when V <= 1e-14.
double counting_fisher(const ParameterFamily& family, double theta, double h = 0.0);

struct McFisherOptions {
  ReferenceKind kind = ReferenceKind::poisson;  // poisson selects counting records
  double T = 10.0;
  double dt = 1e-3;
  std::size_t n_traj = 200;
  double h = 0.0;
  std::uint64_t seed = 0;
  CountingScheme scheme = CountingScheme::bernoulli;
};

struct McFisherResult {
  double fisher = 0.0;
  double standard_error = 0.0;
  double mean_score = 0.0;
  double mean_score_se = 0.0;
};

/// Variance of the finite-difference score over records simulated at theta.
McFisherResult mc_classical_fisher(const ParameterFamily& family, double theta, const DensityOperator& rho0,
                                   const McFisherOptions& options);

}  // namespace qio
