#pragma once

#include <vector>

#include "qio/operator_core.hpp"

namespace qio::detail {

/// First-order Kraus-form increments of the conditional dynamics. With the
/// no-jump propagator M0 = exp(-(iH + L^dag L / 2) dt), a diffusive step is rho -> M rho M^dag with
/// M = M0 + L dY, a counting step without a jump is rho -> M0 rho M0^dag and a
/// jump is rho -> L rho L^dag. All maps are linear and completely positive.
class StepKit {
 public:
  StepKit(const QMarkovModel& model, double dt);

  double dt() const { return dt_; }
  const CMatrix& m0() const { return m0_; }
  const CMatrix& L() const { return l_; }
  const CMatrix& LdagL() const { return ldl_; }

  CMatrix diffusive(const CMatrix& rho, double dy) const;
  CMatrix drift(const CMatrix& rho) const;
  CMatrix jump(const CMatrix& rho) const;

  double homodyne_mean(const CMatrix& rho) const;
  double jump_rate(const CMatrix& rho) const;

 private:
  double dt_;
  CMatrix l_;
  CMatrix ldl_;
  CMatrix m0_;
};

/// Divides by the trace, restores Hermiticity and clips eigenvalues below
/// -1e-12 (safeguard; the Kraus form keeps states positive). Returns the trace.
double normalize_state(CMatrix& rho);

/// Counting records are integrated on n = ceil(T / dt) equal steps of length T / n.
struct CountingGrid {
  Index steps = 0;
  double dt = 0.0;
  /// Step index for each jump: the step (k dt, (k+1) dt] containing it.
  std::vector<Index> jump_steps;
};

CountingGrid counting_grid(double horizon, const std::vector<double>& jumps, double dt);

}  // namespace qio::detail
