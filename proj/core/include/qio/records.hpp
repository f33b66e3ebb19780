#pragma once

#include <variant>
#include <vector>

#include "qio/types.hpp"

namespace qio {

/// Sampled homodyne increments dY_k on the grid k*dt, k = 0..n-1.
struct DiffusiveRecord {
  double dt = 0.0;
  std::vector<double> increments;

  double horizon() const { return dt * static_cast<double>(increments.size()); }
  /// Throws invalid_argument unless dt > 0, len >= 1 and all increments finite.
  void validate() const;
};

/// Photon-counting record: strictly increasing jump times in (0, horizon].
struct CountingRecord {
  double horizon = 0.0;
  std::vector<double> jumps;

  std::size_t count() const { return jumps.size(); }
  void validate() const;
};

using MeasurementRecord = std::variant<DiffusiveRecord, CountingRecord>;

void validate(const MeasurementRecord& record);
double horizon(const MeasurementRecord& record);

/// Normalised conditional states rho_c on a time grid. `states` may be
/// thinned (see FilterOptions::keep_every) or empty.
struct FilterTrajectory {
  std::vector<double> times;
  std::vector<CMatrix> states;
  CMatrix final_state;
  double loglik = 0.0;
};

}  // namespace qio
