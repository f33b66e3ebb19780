#pragma once

#include <vector>

#include "qio/operator_core.hpp"
#include "qio/records.hpp"

namespace qio {

struct FilterOptions {
  /// Integration step for counting records (diffusive records carry their own).
  double dt = 1e-3;
  /// Intensity of the reference Poisson measure for counting likelihoods.
  double lambda = 1.0;
  /// Store every k-th state (0 stores none; the final state is always kept).
  std::size_t keep_every = 1;
};

/// Unnormalised conditional states. The stored matrices are rescaled copies:
/// varrho_t = exp(log_scale[k]) * states[k].
struct ZakaiTrajectory {
  std::vector<double> times;
  std::vector<CMatrix> states;
  std::vector<double> log_scale;
  std::vector<double> logtrace;
  CMatrix final_state;
  double final_logtrace = 0.0;
};

/// Normalised filter. FilterTrajectory::loglik accumulates the log of each
/// step's normalisation factor. Throws Errc::zero_jump_rate when a counting
/// record jumps while Tr(L^dag L rho_c) <= 1e-14.
FilterTrajectory run_filter(const QMarkovModel& model, const DensityOperator& rho0,
                            const MeasurementRecord& record, const FilterOptions& options = {});

ZakaiTrajectory run_zakai(const QMarkovModel& model, const DensityOperator& rho0,
                          const MeasurementRecord& record, const FilterOptions& options = {});

/// log Tr varrho_T; -inf for records of likelihood zero. Counting records use
/// a jump-to-jump propagator that reproduces run_zakai to rounding.
double log_likelihood(const QMarkovModel& model, const DensityOperator& rho0,
                      const MeasurementRecord& record, const FilterOptions& options = {});

/// Jump/no-jump accumulation of log-likelihood increments along the
/// normalised filter: log(e^{lambda dt} Tr(M0 rho M0^dag)) per step and
/// log(Tr(L sigma L^dag) / lambda) per jump. Returns -inf instead of throwing
/// on a zero-rate jump.
double counting_loglik_accumulation(const QMarkovModel& model, const DensityOperator& rho0,
                                    const CountingRecord& record, const FilterOptions& options = {});

/// Continuous-time form of the counting increments, sum of (lambda - mu_t) dt
/// plus log(mu_t / lambda) at each jump, mu_t = Tr(L^dag L rho_c). Agrees with
/// the exact accumulation to O(dt).
double counting_loglik_continuous(const QMarkovModel& model, const DensityOperator& rho0,
                                  const CountingRecord& record, const FilterOptions& options = {});

/// Girsanov form sum m_k dY_k - m_k^2 dt / 2, m_k = Tr((L + L^dag) rho_c).
double girsanov_loglik(const QMarkovModel& model, const DensityOperator& rho0,
                       const DiffusiveRecord& record);

}  // namespace qio
