#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qio/linear_system.hpp"
#include "qio/sampled.hpp"

namespace qio {

/// Maximal-length 31-bit Fibonacci LFSR (x^31 + x^28 + 1) mapped to +-amplitude,
/// each bit held for `hold` samples.
Vector prbs(Index length, double amplitude, std::uint64_t seed, Index hold = 1);
/// Two independently seeded PRBS channels as a 2 x length matrix.
Matrix prbs_inputs(Index length, double amplitude, std::uint64_t seed, Index hold = 1);

/// Sampled identification data: inputs f_k (m x N) and outputs y_k = dY_k / dt.
struct SysIdDataset {
  double dt = 0.0;
  Matrix inputs;
  Vector outputs;
  /// Fraction of samples (from the start) used for estimation.
  double split = 0.7;

  Index size() const { return outputs.size(); }
  Index estimation_length() const;
  SysIdDataset estimation() const;
  SysIdDataset validation() const;
  /// Throws Errc::insufficient_data when empty or either split is empty.
  void validate() const;
};

struct DiscreteIdentification {
  DiscretePredictor model;
  Vector singular_values;
  Index states = 0;
};

/// Combined deterministic-stochastic subspace identification with `horizon`
/// block rows: oblique projection of future outputs onto past data along
/// future inputs, SVD truncation to 2n states, A and C from the shift structure
/// of the extended observability matrix, B and D by least squares on the
/// output equation, K from the state-sequence residual covariances.
/// Throws Errc::insufficient_data and Errc::not_exciting.
DiscreteIdentification subspace_id_discrete(const SysIdDataset& data, Index order, Index horizon = 10);

struct SubspaceResult {
  DiscreteIdentification discrete;
  /// Continuous (A, B, C_m) of the sampled model; Errc::log_branch on failure.
  ContinuousTriple continuous;
};

SubspaceResult subspace_id(const SysIdDataset& data, Index order, Index horizon = 10);

/// C with the unmeasured row given by C^T = -Z^{-1} B J D^T and the measured row
/// copied from C_m (pass an empty C_m to fill both rows). Throws Errc::singular_z.
Matrix recover_full_C(const Matrix& Z, const Matrix& B, const Matrix& D, Quadrature measured, const Matrix& C_m);

struct ProjectionOptions {
  int starts = 8;
  int max_iterations = 400;
  std::uint64_t seed = 0;
};

struct ProjectionResult {
  LinearQSystem system;
  Matrix Z;
  /// M = (||A - Ahat||^2 + ||B - Bhat||^2 + ||C_m - Chat_m||^2) / 2.
  double cost = 0.0;
  double pr2_residual = 0.0;
  std::vector<double> start_costs;
  /// Largest minus smallest final cost over the starts.
  double spread = 0.0;
};

/// Nearest (locally) system satisfying the generalised realizability
/// constraints, parametrised as A = T A0(R,K) T^{-1}, B = T B0(R,K),
/// C = C0(R,K) T^{-1}, Z = T J_n T^T and fitted by Levenberg-Marquardt from
/// several starts. Throws Errc::optimization_failed.
ProjectionResult pr_projection(const ContinuousTriple& raw, const Matrix& D, Quadrature measured,
                               const ProjectionOptions& options = {});

/// Physical system from (R, K, T) for a general invertible D.
LinearQSystem realizable_from_parameters(const Matrix& R, const CMatrix& K, const Matrix& T, const Matrix& D);

struct FpeEntry {
  Index order = 0;
  double vn = 0.0;
  Index parameters = 0;
  double fpe = 0.0;
};

struct FpeResult {
  Index best = 0;
  std::vector<FpeEntry> table;
};

/// V_N (1 + p/N) / (1 - p/N).
double fpe_value(double vn, Index parameters, Index samples);
/// Free parameters of an order-n model with 2n states, l outputs, m inputs:
/// 2n (2l + m) + l m.
Index fpe_parameters(Index order, Index outputs, Index inputs);

/// Identifies each order on `data` (all samples) and scores the one-step
/// prediction error there. Ties, including V_N = 0, go to the smaller order.
FpeResult fpe_order_select(const SysIdDataset& data, std::span<const Index> orders, Index horizon = 10);

/// sum (y - yhat)^2 / sum (y - ybar)^2. Throws Errc::degenerate_output.
double nmse(const Vector& y, const Vector& yhat);

/// Runs the sampled Kalman predictor of (g, L_m) over the whole record and
/// scores it on the validation split.
double validate_nmse(const LinearQSystem& g, const Matrix& L_m, Quadrature quadrature, const SysIdDataset& data);

struct PipelineConfig {
  std::optional<LinearQSystem> system;
  std::optional<SysIdDataset> dataset;
  double dt = 0.2;
  double T = 1000.0;
  double prbs_amplitude = 10.0;
  Index prbs_hold = 1;
  std::vector<Index> orders{1, 2, 3};
  Quadrature quadrature = Quadrature::Q;
  std::uint64_t seed = 0;
  double split = 0.7;
  Index horizon = 10;
  InnovationScheme scheme = InnovationScheme::exact;
  int projection_starts = 8;
};

struct SysIdResult {
  Index order = 0;
  DiscreteIdentification raw_discrete;
  ContinuousTriple raw;
  ProjectionResult projection;
  FpeResult fpe;
  Matrix L_m;
  double nmse = 0.0;
};

/// Dataset from PRBS-driven innovation-form simulation of `system`.
SysIdDataset generate_dataset(const LinearQSystem& system, Quadrature quadrature, double dt, double T,
                              double amplitude, std::uint64_t seed, double split = 0.7, Index hold = 1,
                              InnovationScheme scheme = InnovationScheme::exact);

/// prbs -> simulate -> split -> FPE order selection -> subspace_id ->
/// pr_projection -> recover_full_C -> validate_nmse. Errors carry the stage
/// name (Error::stage()).
SysIdResult run_pipeline(const PipelineConfig& config);

}  // namespace qio
