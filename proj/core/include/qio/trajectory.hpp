#pragma once

#include <cstdint>
#include <utility>

#include "qio/operator_core.hpp"
#include "qio/records.hpp"

namespace qio {

enum class CountingScheme {
  /// First-order thinning on the dt grid; jumps are stamped at step ends.
  bernoulli,
  /// Exact jump times from the no-jump survival function under the
  /// effective Hamiltonian H - i L^dag L / 2.
  waiting_time,
};

enum class ReferenceKind { wiener, poisson };

struct SimulationOptions {
  /// Store every k-th state in the returned trajectory (0 keeps none).
  std::size_t keep_every = 1;
  CountingScheme counting_scheme = CountingScheme::bernoulli;
  std::uint64_t stream = 0;
};

/// dt * ||L||_2^2 must not exceed this bound.
inline constexpr double kStepGuard = 0.1;

/// Raises Errc::step_too_large when dt * ||L||_2^2 > kStepGuard.
void check_step(const QMarkovModel& model, double dt);

std::pair<DiffusiveRecord, FilterTrajectory> simulate_homodyne(const QMarkovModel& model,
                                                               const DensityOperator& rho0, double T,
                                                               double dt, std::uint64_t seed,
                                                               const SimulationOptions& options = {});

/// In waiting_time mode `dt` only sets the reported grid for stored states
/// (one state after each jump plus the final state) and must be <= T.
std::pair<CountingRecord, FilterTrajectory> simulate_counting(const QMarkovModel& model,
                                                              const DensityOperator& rho0, double T,
                                                              double dt, std::uint64_t seed,
                                                              const SimulationOptions& options = {});

/// Record drawn from the reference measure: Wiener increments on the grid, or
/// a homogeneous Poisson process of intensity lambda on (0, T].
MeasurementRecord simulate_reference(ReferenceKind kind, double lambda, double T, double dt,
                                     std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace qio
