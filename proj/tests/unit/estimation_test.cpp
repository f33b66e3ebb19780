#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fixtures.hpp"
#include "qio/error.hpp"
#include "qio/estimation.hpp"

namespace qio {
namespace {

using testing::driven_qubit;
using testing::rabi_family;

constexpr double kInf = std::numeric_limits<double>::infinity();

ParameterFamily constant_family(double lo = 0.0, double hi = 2.0) {
  const CMatrix zero = CMatrix::Zero(2, 2);
  return ParameterFamily::affine(driven_qubit(), {zero}, {zero}, Box::interval(lo, hi));
}

CountingRecord counting_record(const QMarkovModel& m, double T, std::uint64_t seed, std::uint64_t stream = 0) {
  SimulationOptions sim;
  sim.keep_every = 0;
  sim.counting_scheme = CountingScheme::waiting_time;
  sim.stream = stream;
  return simulate_counting(m, DensityOperator::maximally_mixed(2), T, 1e-2, seed, sim).first;
}

template <class Fn>
Errc error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no qio::Error raised";
  return Errc::invalid_argument;
}

TEST(MaximizeOnBox, SinglePointDomain) {
  Box box = Box::interval(0.7, 0.7);
  const auto res = maximize_on_box([](const Vector& t) { return -t(0) * t(0); }, box);
  EXPECT_EQ(res.argmax(0), 0.7);
}

TEST(MaximizeOnBox, FlatObjectiveReturnsFirstGridPoint) {
  const auto res = maximize_on_box([](const Vector&) { return 3.0; }, Box::interval(-1.0, 2.0));
  EXPECT_TRUE(res.flat);
  EXPECT_EQ(res.argmax(0), -1.0);
}

TEST(MaximizeOnBox, RefinesOffGridOptimum) {
  Box box;
  box.lower = Vector::Constant(2, -1.0);
  box.upper = Vector::Constant(2, 1.0);
  const auto res = maximize_on_box(
      [](const Vector& t) { return -std::pow(t(0) - 0.3141, 2) - 2.0 * std::pow(t(1) + 0.2718, 2); }, box);
  EXPECT_FALSE(res.flat);
  EXPECT_NEAR(res.argmax(0), 0.3141, 1e-4);
  EXPECT_NEAR(res.argmax(1), -0.2718, 1e-4);
}

TEST(MaximizeOnBox, OptimumOnBoundaryStaysInside) {
  const auto res = maximize_on_box([](const Vector& t) { return t(0); }, Box::interval(0.0, 1.0));
  EXPECT_NEAR(res.argmax(0), 1.0, 1e-12);
}

TEST(MaximizeOnBox, AllImpossible) {
  EXPECT_EQ(error_code([] { maximize_on_box([](const Vector&) { return -kInf; }, Box::interval(0, 1)); }),
            Errc::all_records_impossible);
}

TEST(Mle, ReferenceIntensityDoesNotMoveEstimate) {
  const ParameterFamily fam = rabi_family(1.0, 0.2, 3.0);
  std::vector<MeasurementRecord> recs{counting_record(driven_qubit(), 100.0, 5)};
  MleOptions one, two;
  two.filter.lambda = 2.0;
  const DensityOperator rho0 = DensityOperator::maximally_mixed(2);
  const auto a = mle(fam, recs, rho0, one);
  const auto b = mle(fam, recs, rho0, two);
  EXPECT_NEAR(a.argmax(0), b.argmax(0), 1e-6);
}

TEST(Mle, FlatFamily) {
  std::vector<MeasurementRecord> recs{counting_record(driven_qubit(), 10.0, 1)};
  const auto res = mle(constant_family(0.5, 1.5), recs, DensityOperator::maximally_mixed(2));
  EXPECT_TRUE(res.flat);
  EXPECT_EQ(res.argmax(0), 0.5);
}

TEST(Mle, DarkFamilyWithJumpIsImpossible) {
  const CMatrix zero = CMatrix::Zero(2, 2);
  const ParameterFamily fam =
      ParameterFamily::affine(QMarkovModel(zero, pauli::lower()), {zero}, {zero}, Box::interval(0, 1));
  std::vector<MeasurementRecord> recs{CountingRecord{1.0, {0.5}}};
  EXPECT_EQ(error_code([&] { mle(fam, recs, DensityOperator::basis_state(2, 0)); }), Errc::all_records_impossible);
}

TEST(PosteriorGrid, ThetaIndependentFamilyKeepsPrior) {
  const ParameterFamily fam = constant_family();
  std::vector<MeasurementRecord> recs{counting_record(driven_qubit(), 20.0, 2)};
  const auto grid = regular_grid(fam.domain(), 5);
  ASSERT_EQ(grid.size(), 5u);
  const std::vector<double> prior{0.1, 0.2, 0.3, 0.25, 0.15};
  const auto post = posterior_grid(fam, recs, DensityOperator::maximally_mixed(2), grid, prior);
  for (std::size_t i = 0; i < prior.size(); ++i) EXPECT_NEAR(post.weights[i], prior[i], 1e-12);
}

TEST(PosteriorGrid, PointMassPrior) {
  const ParameterFamily fam = rabi_family(1.0, 0.2, 3.0);
  std::vector<MeasurementRecord> recs{counting_record(driven_qubit(), 20.0, 3)};
  const auto grid = regular_grid(fam.domain(), 7);
  std::vector<double> prior(7, 0.0);
  prior[4] = 1.0;
  const auto post = posterior_grid(fam, recs, DensityOperator::maximally_mixed(2), grid, prior);
  EXPECT_EQ(post.weights[4], 1.0);
  EXPECT_EQ(post.map(0), grid[4](0));
  EXPECT_NEAR(post.pm(0), grid[4](0), 1e-15);
}

TEST(PosteriorGrid, WeightsNormalisedAndEstimatorsInHull) {
  const ParameterFamily fam = rabi_family(1.0, 0.2, 3.0);
  std::vector<MeasurementRecord> recs{counting_record(driven_qubit(), 200.0, 4)};
  const auto grid = regular_grid(fam.domain(), 29);
  const std::vector<double> prior(grid.size(), 1.0 / static_cast<double>(grid.size()));
  const auto post = posterior_grid(fam, recs, DensityOperator::maximally_mixed(2), grid, prior);
  double total = 0.0;
  for (double w : post.weights) total += w;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_GE(post.pm(0), 0.2);
  EXPECT_LE(post.pm(0), 3.0);
  bool on_grid = false;
  for (const Vector& g : grid) on_grid = on_grid || g(0) == post.map(0);
  EXPECT_TRUE(on_grid);
}

TEST(PosteriorGrid, Degenerate) {
  const CMatrix zero = CMatrix::Zero(2, 2);
  const ParameterFamily fam =
      ParameterFamily::affine(QMarkovModel(zero, pauli::lower()), {zero}, {zero}, Box::interval(0, 1));
  std::vector<MeasurementRecord> recs{CountingRecord{1.0, {0.5}}};
  const auto grid = regular_grid(fam.domain(), 3);
  const std::vector<double> prior(3, 1.0 / 3.0);
  EXPECT_EQ(error_code([&] { posterior_grid(fam, recs, DensityOperator::basis_state(2, 0), grid, prior); }),
            Errc::degenerate_posterior);
}

TEST(Abc, InfiniteToleranceAcceptsEverything) {
  const ParameterFamily fam = rabi_family(1.0, 0.2, 3.0);
  AbcOptions opts;
  opts.n_sims = 50;
  opts.pilot = 10;
  opts.epsilon = kInf;
  opts.seed = 8;
  const PriorSampler prior = [](RandomStream& r) { return Vector::Constant(1, 0.2 + 2.8 * r.uniform()); };
  const StatisticFn stat = [](const MeasurementRecord& r) {
    return Vector::Constant(1, static_cast<double>(stat_total_counts(std::get<CountingRecord>(r))));
  };
  const auto res = abc_rejection(fam, Vector::Constant(1, 10.0), prior,
                                 counting_simulator(DensityOperator::maximally_mixed(2), 20.0, 1e-2,
                                                    CountingScheme::waiting_time),
                                 stat, opts);
  EXPECT_EQ(res.accepted.size(), 50u);
  for (std::size_t i = 0; i < res.accepted.size(); ++i) {
    RandomStream r(8, 2 * i);
    EXPECT_EQ(res.accepted[i](0), prior(r)(0));
  }
}

TEST(Abc, ZeroToleranceContinuousStatistic) {
  const ParameterFamily fam = rabi_family(1.0, 0.2, 3.0);
  AbcOptions opts;
  opts.n_sims = 30;
  opts.pilot = 10;
  opts.epsilon = 0.0;
  const PriorSampler prior = [](RandomStream& r) { return Vector::Constant(1, 0.2 + 2.8 * r.uniform()); };
  const StatisticFn stat = [](const MeasurementRecord& r) {
    const auto& rec = std::get<CountingRecord>(r);
    return Vector::Constant(1, rec.jumps.empty() ? 0.0 : rec.jumps.front());
  };
  const auto res = abc_rejection(fam, Vector::Constant(1, 0.123456789), prior,
                                 counting_simulator(DensityOperator::maximally_mixed(2), 20.0, 1e-2,
                                                    CountingScheme::waiting_time),
                                 stat, opts);
  EXPECT_TRUE(res.no_acceptances);
  EXPECT_TRUE(res.accepted.empty());
}

TEST(Statistics, TotalCounts) {
  EXPECT_EQ(stat_total_counts(CountingRecord{2.0, {0.5, 1.2}}), 2u);
  EXPECT_EQ(stat_total_counts(CountingRecord{2.0, {}}), 0u);
}

TEST(Statistics, BinnedCounts) {
  const Vector b = stat_binned_counts(CountingRecord{4.0, {0.5, 1.2, 1.9, 3.99, 4.0}}, 4);
  ASSERT_EQ(b.size(), 4);
  EXPECT_EQ(b(0), 1.0);
  EXPECT_EQ(b(1), 2.0);
  EXPECT_EQ(b(2), 0.0);
  EXPECT_EQ(b(3), 2.0);
}

TEST(Statistics, TwoTimeCorrelationTrivial) {
  const DiffusiveRecord zeros{0.1, std::vector<double>(50, 0.0)};
  EXPECT_EQ(stat_two_time_corr(zeros, [](double t) { return std::exp(-t); }), 0.0);
  RandomStream r(3);
  DiffusiveRecord rec{0.1, {}};
  for (int i = 0; i < 50; ++i) rec.increments.push_back(r.normal());
  EXPECT_EQ(stat_two_time_corr(rec, [](double) { return 0.0; }), 0.0);
}

TEST(Statistics, TwoTimeCorrelationMatchesDoubleLoop) {
  RandomStream r(11);
  DiffusiveRecord rec{0.05, {}};
  for (int i = 0; i < 400; ++i) rec.increments.push_back(r.normal(0.0, std::sqrt(0.05)));
  double naive = 0.0;
  for (std::size_t i = 0; i < rec.increments.size(); ++i)
    for (std::size_t j = i + 1; j < rec.increments.size(); ++j)
      naive += std::exp(-0.7 * static_cast<double>(j - i) * rec.dt) * rec.increments[i] * rec.increments[j];
  const auto kernel = [](double t) { return std::exp(-0.7 * t); };
  EXPECT_NEAR(stat_two_time_corr(rec, kernel), naive, 1e-10 * std::max(1.0, std::abs(naive)));
  EXPECT_NEAR(stat_two_time_corr_exponential(rec, 0.7), naive, 1e-10 * std::max(1.0, std::abs(naive)));
}

TEST(CountingMoments, NoCoupling) {
  const auto m = counting_rate_and_variance(QMarkovModel(pauli::x(), CMatrix::Zero(2, 2)));
  EXPECT_EQ(m.mu, 0.0);
  EXPECT_EQ(m.V, 0.0);
}

TEST(CountingMoments, PureDecayIsNotErgodic) {
  EXPECT_EQ(error_code([] { counting_rate_and_variance(QMarkovModel(CMatrix::Zero(2, 2), pauli::lower())); }),
            Errc::not_ergodic);
}

TEST(CountingMoments, ResonanceFluorescence) {
  // Photon statistics of a resonantly driven two-level atom: rate
  // kappa Omega^2 / (kappa^2 + 2 Omega^2), Mandel Q = -6 Omega^2 kappa^2 / (kappa^2 + 2 Omega^2)^2.
  for (auto [omega, kappa] : {std::pair{1.0, 1.0}, std::pair{2.0, 1.5}, std::pair{0.3, 2.0}}) {
    const double s = kappa * kappa + 2.0 * omega * omega;
    const double mu = kappa * omega * omega / s;
    const double q = -6.0 * omega * omega * kappa * kappa / (s * s);
    const auto m = counting_rate_and_variance(driven_qubit(omega, kappa));
    EXPECT_NEAR(m.mu, mu, 1e-12);
    EXPECT_NEAR(m.V, mu * (1.0 + q), 1e-12);
  }
}

TEST(CountingFisher, AnalyticDrivenQubit) {
  const ParameterFamily fam = rabi_family(1.0, 0.0, 3.0);
  // mu(Omega) = Omega^2 / (1 + 2 Omega^2), V(1) = 1/9, mu'(1) = 2/9.
  EXPECT_NEAR(counting_fisher(fam, 1.0), 4.0 / 9.0, 1e-7);
  const double a = counting_fisher(fam, 1.7, 1e-3);
  const double b = counting_fisher(fam, 1.7, 5e-4);
  EXPECT_NEAR(a, b, 0.01 * b);
}

TEST(CountingFisher, PhaseFamilyIsBlind) {
  const ParameterFamily fam = ParameterFamily::phase(driven_qubit(), Box::interval(-1.0, 1.0));
  EXPECT_NEAR(counting_fisher(fam, 0.2), 0.0, 1e-12);
  EXPECT_NEAR(counting_fisher(constant_family(), 1.0), 0.0, 1e-12);
}

TEST(CountingFisher, ZeroVariance) {
  const CMatrix zero = CMatrix::Zero(2, 2);
  const ParameterFamily fam =
      ParameterFamily::affine(QMarkovModel(pauli::z(), zero), {pauli::x()}, {zero}, Box::interval(0, 1));
  EXPECT_EQ(error_code([&] { counting_fisher(fam, 0.5); }), Errc::zero_variance);
}

TEST(McFisher, ThetaIndependentFamily) {
  McFisherOptions opts;
  opts.T = 5.0;
  opts.dt = 1e-2;
  opts.n_traj = 40;
  opts.scheme = CountingScheme::waiting_time;
  const auto res = mc_classical_fisher(constant_family(), 1.0, DensityOperator::maximally_mixed(2), opts);
  EXPECT_LE(res.fisher, 3.0 * res.standard_error + 1e-12);
  EXPECT_LE(std::abs(res.mean_score), 1e-12);
}

TEST(McFisher, ScoreHasZeroMean) {
  McFisherOptions opts;
  opts.T = 20.0;
  opts.dt = 1e-2;
  opts.n_traj = 200;
  opts.seed = 4;
  opts.scheme = CountingScheme::waiting_time;
  const auto res = mc_classical_fisher(rabi_family(1.0, 0.2, 3.0), 1.0, DensityOperator::maximally_mixed(2), opts);
  EXPECT_GT(res.fisher, 0.0);
  EXPECT_LE(std::abs(res.mean_score), 3.0 * res.mean_score_se);
}

}  // namespace
}  // namespace qio
