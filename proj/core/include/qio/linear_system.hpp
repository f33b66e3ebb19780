#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qio/random.hpp"
#include "qio/records.hpp"
#include "qio/types.hpp"

namespace qio {

/// Quadrature-form linear quantum system with n modes:
/// dx = A x dt + B dW, dY = C x dt + D dW, x of length 2n, W of length 2.
/// Canonical commutation relations are taken as [x, x^T] = 2i J_n.
struct LinearQSystem {
  Index n = 0;
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D = Matrix::Identity(2, 2);

  static LinearQSystem make(Matrix A, Matrix B, Matrix C, Matrix D = Matrix::Identity(2, 2));
  /// Throws invalid_argument on inconsistent shapes.
  void validate() const;
};

/// H = x^T R x / 2 and coupling L = K x with K a complex 1 x 2n row.
struct QuadraticSpec {
  Matrix R;
  CMatrix K;

  Index n() const { return R.rows() / 2; }
  void validate() const;
};

/// J = [[0, 1], [-1, 0]].
Matrix symplectic_unit();
/// J_n = I_n kron J.
Matrix symplectic_form(Index n);
bool is_symplectic(const Matrix& v, double tol = 1e-9);

/// A = 2 J_n (R + Im(K^dag K)), B = 2 J_n [-Im K^T, Re K^T], C = 2 [Re K; Im K], D = I.
LinearQSystem build_linear_system(const QuadraticSpec& spec);

/// max(||A J_n + J_n A^T + B J B^T||_max, ||J_n C^T + B J D^T||_max).
double check_pr1(const LinearQSystem& g);

/// Residual of A Z + Z A^T + B J B^T = 0 and Z C^T + B J D^T = 0.
double pr2_residual(const LinearQSystem& g, const Matrix& z);

enum class Pr2Status { ok, no_skew_solution, singular_z };

struct Pr2Result {
  Pr2Status status = Pr2Status::no_skew_solution;
  double residual = 0.0;
  std::optional<Matrix> Z;
  /// Symplectic factor with Z = V J_n V^T.
  std::optional<Matrix> V;
};

/// Least-squares skew-symmetric solution of the generalised realizability
/// equations. A least-squares solution with residual above 1e-8, or the
/// trivial solution Z = 0, is reported as no_skew_solution; a non-zero
/// singular solution as singular_z.
Pr2Result check_pr2(const LinearQSystem& g);
/// As check_pr2 but throws Errc::no_skew_solution / Errc::singular_z.
Pr2Result solve_pr2(const LinearQSystem& g);

/// V with Z = V J_n V^T from the real Schur form of the skew matrix Z.
/// Throws Errc::singular_z when Z is singular.
Matrix symplectic_factor(const Matrix& z);

/// C (sI - A)^{-1} B + D. Throws Errc::singular_resolvent.
CMatrix transfer_function(const LinearQSystem& g, cplx s);

/// Symmetric PSD covariance rate of a Gaussian input; vacuum is I_2.
struct GaussianInput {
  Matrix Gamma = Matrix::Identity(2, 2);
  void validate() const;
};

/// conj(Xi(i w)) Gamma Xi(i w)^T. Throws Errc::not_hurwitz.
CMatrix power_spectrum(const LinearQSystem& g, const GaussianInput& input, double omega);

/// (V A V^{-1}, V B, C V^{-1}, D).
LinearQSystem symplectic_transform(const LinearQSystem& g, const Matrix& v);

/// Controllability and observability matrices both of rank 2n (cutoff 1e-9 sigma_max).
bool minimality_check(const LinearQSystem& g);

enum class Quadrature { Q, P };
Index quadrature_row(Quadrature q);

struct KalmanResult {
  Matrix L_m;  // 2n x 1
  Matrix Q_m;  // 2n x 2n
  double riccati_residual = 0.0;
  Matrix closed_loop;  // A - L_m C_m
};

/// Steady-state Kalman filter for homodyne detection of one output quadrature
/// with vacuum input: solves A Q + Q A^T + B B^T - L_m L_m^T (D_m D_m^T) = 0 with
/// L_m = (Q C_m^T + B D_m^T)(D_m D_m^T)^{-1}. Throws Errc::not_hurwitz and
/// Errc::riccati_failure.
KalmanResult kalman_gain(const LinearQSystem& g, Quadrature quadrature);

enum class InnovationScheme {
  /// Euler-Maruyama on the grid; requires dt * spectral_radius(A) <= 0.1.
  euler,
  /// Exact sampling of (z, Y) with inputs held constant over each step.
  exact,
};

struct InnovationOptions {
  InnovationScheme scheme = InnovationScheme::euler;
  /// Force the innovation to zero (deterministic response).
  bool suppress_noise = false;
  std::uint64_t stream = 0;
};

struct InnovationSimulation {
  DiffusiveRecord Y;
  /// State at grid points 0..N, one column per time.
  Matrix z;
};

/// dz = A z dt + B f dt + L_m dnu, dY = C_m z dt + D_m f dt + dnu, with nu a
/// scalar standard Wiener process and f held constant on each step.
/// `inputs` is 2 x N. The record length is N = inputs.cols().
InnovationSimulation simulate_innovation_form(const LinearQSystem& g, const Matrix& L_m, Quadrature quadrature,
                                              const Matrix& inputs, double dt, std::uint64_t seed,
                                              const InnovationOptions& options = {});

/// Innovations dnu_k reconstructed by running the Euler Kalman predictor on Y.
Vector kalman_innovations(const LinearQSystem& g, const Matrix& L_m, Quadrature quadrature, const Matrix& inputs,
                          const DiffusiveRecord& Y);

/// Lag-1 sample autocorrelation sum e_k e_{k+1} / sum e_k^2.
double lag1_autocorrelation(const Vector& e);

struct RigidityReport {
  bool rigid = false;
  std::size_t samples = 0;
  /// Largest rotation angle (mod pi) among samples leaving Gamma invariant.
  double max_invariant_angle = 0.0;
};

/// Heuristic: samples orthogonal symplectic 2x2 matrices (rotations) and
/// reports whether only +-I leave Gamma invariant. Sampling-based, not a proof.
RigidityReport gamma_rigidity_heuristic(const Matrix& gamma, std::size_t samples, std::uint64_t seed,
                                        double tol = 1e-9);

/// exp(J_n S) with S symmetric Gaussian of the given scale.
Matrix random_symplectic(Index n, RandomStream& rng, double scale = 0.5);
QuadraticSpec random_quadratic_spec(Index n, RandomStream& rng);
/// Rejection-samples specs until the system is Hurwitz and minimal.
LinearQSystem random_realizable_system(Index n, RandomStream& rng);

}  // namespace qio
