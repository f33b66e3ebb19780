#pragma once

#include "qio/types.hpp"

namespace qio {

/// Integrate-and-dump sampling of dz = A z dt + B f dt, dY = C_m z dt + D_m f dt
/// with f held constant on [kh, (k+1)h) and y_k = (Y_{k+1} - Y_k) / h:
/// z_{k+1} = Ad z_k + Bd f_k, y_k = Cd z_k + Dd f_k.
struct SampledModel {
  Matrix Ad;
  Matrix Bd;
  Matrix Cd;
  Matrix Dd;
};

SampledModel discretize_sampled(const Matrix& A, const Matrix& B, const Matrix& Cm, const Matrix& Dm, double h);

struct ContinuousTriple {
  Matrix A;
  Matrix B;
  Matrix Cm;
};

/// Inverse of discretize_sampled for (A, B, C_m). Throws Errc::log_branch when
/// Ad has an eigenvalue on the closed negative real axis.
ContinuousTriple continuous_from_sampled(const Matrix& Ad, const Matrix& Bd, const Matrix& Cd, double h);

/// Exact one-step map of the innovation form with scalar innovation:
/// z_{k+1} = Az z_k + Bz f_k + w_k, dY_k = Cy z_k + Dy f_k + v_k, where
/// (w_k, v_k) is Gaussian with covariance `cov` ((2n+1) x (2n+1)).
struct ExactStep {
  Matrix Az;
  Matrix Bz;
  Matrix Cy;
  Matrix Dy;
  Matrix cov;
};

ExactStep exact_innovation_step(const Matrix& A, const Matrix& B, const Matrix& Cm, const Matrix& Dm,
                                const Matrix& Lm, double h);

/// Discrete innovation model x_{k+1} = A x + B u + K e, y = C x + D u + e.
struct DiscretePredictor {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D;
  Matrix K;
};

/// Steady-state one-step predictor of y_k = dY_k / h for sampled innovation-form data.
DiscretePredictor sampled_predictor(const Matrix& A, const Matrix& B, const Matrix& Cm, const Matrix& Dm,
                                    const Matrix& Lm, double h);

/// One-step-ahead predictions yhat_k from x_0 = 0. `inputs` is m x N, `outputs` l x N.
Matrix predict_outputs(const DiscretePredictor& model, const Matrix& inputs, const Matrix& outputs);

}  // namespace qio
