#pragma once

#include <span>

#include "qio/family.hpp"
#include "qio/filter.hpp"
#include "qio/records.hpp"

namespace qio {

/// Tr[rho_ss G_a^dag G_b] for tangent directions (Hdot_a, Ldot_a) at `model`,
/// with G_a = Ldot_a - i[L, zero_mean_inverse(Edot_a)] and
/// Edot_a = Hdot_a + Im(Ldot_a^dag L) - Tr[rho_ss (Hdot_a + Im(Ldot_a^dag L))] I.
/// Throws Errc::not_ergodic.
CMatrix qfi_rate_unscaled(const QMarkovModel& model, std::span<const CMatrix> h_dots,
                          std::span<const CMatrix> l_dots);

/// F_ab = 4 Re Tr[rho_ss G_a^dag G_b], symmetrised.
Matrix qfi_rate(const QMarkovModel& model, std::span<const CMatrix> h_dots, std::span<const CMatrix> l_dots);
Matrix qfi_rate(const ParameterFamily& family, const Vector& theta);

/// Element (r, W) of the gauge group acting as (H, L) -> (W^dag (H + r I) W, W^dag L W).
struct GaugeElement {
  double r = 0.0;
  CMatrix W;

  /// Throws invalid_argument unless ||W^dag W - I|| <= 1e-10.
  void validate() const;
};

QMarkovModel gauge_transform(const QMarkovModel& model, const GaugeElement& g);

/// QFI of the conditional state: filters at theta - h, theta, theta + h on the
/// same record and differentiates the final state by central differences
/// (h <= 0 picks 1e-4 * max(1, |theta|)).
double conditional_qfi(const ParameterFamily& family, double theta, const DensityOperator& rho0,
                       const MeasurementRecord& record, double h = 0.0, const FilterOptions& filter = {});

}  // namespace qio
