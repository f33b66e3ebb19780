#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "fixtures.hpp"
#include "qio/error.hpp"
#include "qio/estimation.hpp"
#include "qio/trajectory.hpp"

namespace qio {
namespace {

using testing::driven_qubit;

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

TEST(SimulateHomodyne, NoCouplingGivesWienerIncrements) {
  const QMarkovModel m(0.5 * pauli::x(), CMatrix::Zero(2, 2));
  const double dt = 1e-3;
  const Index n = 100000;
  SimulationOptions opts;
  opts.keep_every = 0;
  const auto [rec, traj] = simulate_homodyne(m, DensityOperator::basis_state(2, 0), dt * n, dt, 4, opts);
  ASSERT_EQ(static_cast<Index>(rec.increments.size()), n);
  double ss = 0.0;
  for (double dy : rec.increments) ss += dy * dy;
  const double var = ss / static_cast<double>(n);
  EXPECT_LE(std::abs(var - dt), 3.0 * dt * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST(SimulateHomodyne, NoCouplingFollowsUnitaryEvolution) {
  const CMatrix h = 0.5 * pauli::x();
  const QMarkovModel m(h, CMatrix::Zero(2, 2));
  const double dt = 1e-4, T = 1.0;
  const DensityOperator rho0 = DensityOperator::basis_state(2, 0);
  const auto [rec, traj] = simulate_homodyne(m, rho0, T, dt, 9);
  const CMatrix u = CMatrix(-kI * h * T).exp();
  const CMatrix expected = u * rho0.matrix() * u.adjoint();
  EXPECT_LE(testing::max_abs_diff(traj.final_state, expected), 10.0 * dt);
}

TEST(SimulateHomodyne, SingleStepHorizon) {
  const auto [rec, traj] = simulate_homodyne(driven_qubit(), DensityOperator::maximally_mixed(2), 1e-3, 1e-3, 1);
  EXPECT_EQ(rec.increments.size(), 1u);
}

TEST(SimulateHomodyne, EnsembleMeanCurrentMatchesStationaryMean) {
  const QMarkovModel m = driven_qubit();
  const DensityOperator rho_ss = stationary_state(m);
  const double expected = (rho_ss.matrix() * (m.L() + m.L().adjoint())).trace().real();
  const double T = 20.0, dt = 2e-3;
  SimulationOptions opts;
  opts.keep_every = 0;
  std::vector<double> means;
  for (std::uint64_t k = 0; k < 300; ++k) {
    opts.stream = k;
    const auto [rec, traj] = simulate_homodyne(m, rho_ss, T, dt, 2024, opts);
    means.push_back(std::accumulate(rec.increments.begin(), rec.increments.end(), 0.0) / T);
  }
  const Moments mo = moments(means);
  EXPECT_LE(std::abs(mo.mean - expected), 3.0 * mo.se) << mo.mean << " vs " << expected;
}

TEST(SimulateHomodyne, StatesAreValidDensityOperators) {
  const auto [rec, traj] = simulate_homodyne(driven_qubit(2.0, 1.0), DensityOperator::basis_state(2, 0), 5.0, 1e-3, 3);
  for (const CMatrix& rho : traj.states) {
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-10);
    EXPECT_GE(min_eigenvalue(rho), -1e-10);
  }
}

TEST(SimulateHomodyne, SameSeedSameRecord) {
  const auto a = simulate_homodyne(driven_qubit(), DensityOperator::maximally_mixed(2), 2.0, 1e-3, 77).first;
  const auto b = simulate_homodyne(driven_qubit(), DensityOperator::maximally_mixed(2), 2.0, 1e-3, 77).first;
  EXPECT_EQ(a.increments, b.increments);
}

TEST(SimulateHomodyne, StepGuard) {
  const QMarkovModel m(CMatrix::Zero(2, 2), 10.0 * pauli::lower());
  try {
    simulate_homodyne(m, DensityOperator::maximally_mixed(2), 1.0, 1e-2, 1);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::step_too_large);
  }
}

TEST(SimulateCounting, NoCouplingNoJumps) {
  const QMarkovModel m(pauli::x(), CMatrix::Zero(2, 2));
  for (auto scheme : {CountingScheme::bernoulli, CountingScheme::waiting_time}) {
    SimulationOptions opts;
    opts.counting_scheme = scheme;
    EXPECT_EQ(simulate_counting(m, DensityOperator::maximally_mixed(2), 10.0, 1e-3, 5, opts).first.count(), 0u);
  }
}

TEST(SimulateCounting, DecayEmitsAtMostOnePhoton) {
  const QMarkovModel m(CMatrix::Zero(2, 2), pauli::lower());
  const DensityOperator excited = DensityOperator::basis_state(2, 1);
  const int n = 1000;
  int with_jump = 0;
  SimulationOptions opts;
  opts.keep_every = 0;
  for (int k = 0; k < n; ++k) {
    opts.stream = static_cast<std::uint64_t>(k);
    const CountingRecord rec = simulate_counting(m, excited, 10.0, 1e-3, 31, opts).first;
    EXPECT_LE(rec.count(), 1u);
    with_jump += rec.count() == 1 ? 1 : 0;
  }
  const double p = 1.0 - std::exp(-10.0);
  const double sigma = std::sqrt(p * (1.0 - p) / n);
  EXPECT_LE(std::abs(with_jump / static_cast<double>(n) - p), std::max(3.0 * sigma, 1.0 / n));
}

TEST(SimulateCounting, EnsembleRateMatchesStationaryRate) {
  const QMarkovModel m = driven_qubit();
  const double mu = counting_rate_and_variance(m).mu;
  const double T = 100.0;
  for (auto scheme : {CountingScheme::bernoulli, CountingScheme::waiting_time}) {
    SimulationOptions opts;
    opts.keep_every = 0;
    opts.counting_scheme = scheme;
    std::vector<double> rates;
    for (std::uint64_t k = 0; k < 300; ++k) {
      opts.stream = k;
      rates.push_back(static_cast<double>(simulate_counting(m, DensityOperator::maximally_mixed(2), T, 1e-3, 99, opts)
                                              .first.count()) /
                      T);
    }
    const Moments mo = moments(rates);
    EXPECT_LE(std::abs(mo.mean - mu), 3.0 * mo.se) << mo.mean << " vs " << mu;
  }
}

TEST(SimulateCounting, JumpTimesAreValid) {
  SimulationOptions opts;
  opts.counting_scheme = CountingScheme::waiting_time;
  const CountingRecord rec = simulate_counting(driven_qubit(), DensityOperator::maximally_mixed(2), 50.0, 1e-2, 8, opts).first;
  EXPECT_NO_THROW(rec.validate());
  EXPECT_GT(rec.count(), 0u);
}

TEST(SimulateReference, PoissonMeanCount) {
  std::vector<double> counts;
  for (std::uint64_t k = 0; k < 2000; ++k) {
    const auto rec = std::get<CountingRecord>(simulate_reference(ReferenceKind::poisson, 1.0, 10.0, 1e-3, 5, k));
    counts.push_back(static_cast<double>(rec.count()));
  }
  const Moments mo = moments(counts);
  EXPECT_LE(std::abs(mo.mean - 10.0), 3.0 * std::sqrt(10.0 / 2000.0));
}

TEST(SimulateReference, WienerSingleDraw) {
  const auto rec = std::get<DiffusiveRecord>(simulate_reference(ReferenceKind::wiener, 1.0, 1e-3, 1e-3, 5));
  ASSERT_EQ(rec.increments.size(), 1u);
  EXPECT_TRUE(std::isfinite(rec.increments[0]));
}

TEST(SimulateReference, TinyIntensityUsuallyEmpty) {
  int empty = 0;
  for (std::uint64_t k = 0; k < 100; ++k)
    empty += std::get<CountingRecord>(simulate_reference(ReferenceKind::poisson, 1e-3, 1e-3, 1e-3, 1, k)).count() == 0;
  EXPECT_GE(empty, 99);
}

TEST(Records, ValidationRejectsBadInput) {
  EXPECT_THROW((DiffusiveRecord{0.0, {0.1}}.validate()), Error);
  EXPECT_THROW((DiffusiveRecord{1e-3, {}}.validate()), Error);
  EXPECT_THROW((CountingRecord{1.0, {0.5, 0.4}}.validate()), Error);
  EXPECT_THROW((CountingRecord{1.0, {1.5}}.validate()), Error);
  EXPECT_NO_THROW((CountingRecord{1.0, {0.5, 1.0}}.validate()));
}

}  // namespace
}  // namespace qio
