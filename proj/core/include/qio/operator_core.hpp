#pragma once

#include <vector>

#include "qio/types.hpp"

namespace qio {

/// Finite-dimensional quantum input-output system (H, L) with the gauge
/// coupling fixed to the identity. Units: hbar = 1, L in time^{-1/2}.
class QMarkovModel {
 public:
  /// Throws Errc::invalid_argument when shapes disagree or ||H - H^dag||_max > 1e-12.
  QMarkovModel(CMatrix hamiltonian, CMatrix coupling);

  Index dim() const { return h_.rows(); }
  const CMatrix& H() const { return h_; }
  const CMatrix& L() const { return l_; }

 private:
  CMatrix h_;
  CMatrix l_;
};

/// Density operator: Hermitian, unit trace (1e-10), eigenvalues >= -1e-10.
class DensityOperator {
 public:
  explicit DensityOperator(CMatrix rho);

  static DensityOperator pure(const CVector& psi);
  static DensityOperator maximally_mixed(Index dim);
  static DensityOperator basis_state(Index dim, Index k);

  Index dim() const { return rho_.rows(); }
  const CMatrix& matrix() const { return rho_; }

  double min_eigenvalue() const;
  double max_eigenvalue() const;

 private:
  CMatrix rho_;
};

enum class Picture { schrodinger, heisenberg };

/// Column-vectorised linear map on d x d matrices.
struct Superoperator {
  CMatrix matrix;
  Picture picture = Picture::schrodinger;

  Index dim() const;
  CMatrix apply(const CMatrix& x) const;
};

struct SpectralInfo {
  double gap = 0.0;
  std::vector<cplx> eigenvalues;
  bool is_unique = false;   // one-dimensional kernel of the generator
  bool is_ergodic = false;  // unique and full rank
};

/// Schrodinger picture: X -> i[X,H] + L X L^dag - {L^dag L, X}/2.
/// Heisenberg picture: the trace dual X -> i[H,X] + L^dag X L - {L^dag L, X}/2.
Superoperator lindblad_generator(const QMarkovModel& model, Picture picture);

/// Kernel of the Schrodinger generator, normalised to unit trace.
/// Throws Errc::non_unique_stationary_state when the kernel has dimension > 1.
DensityOperator stationary_state(const QMarkovModel& model);

/// Like stationary_state but additionally requires full rank; raises
/// Errc::not_ergodic for either failure.
DensityOperator ergodic_stationary_state(const QMarkovModel& model);

/// Full rank means lambda_min > 1e-10 * lambda_max.
bool is_full_rank(const DensityOperator& rho);

SpectralInfo spectral_info(const QMarkovModel& model);

/// Solves L(A) = X on the zero-mean subspace {A : Tr(rho_ss A) = 0} with the
/// Heisenberg generator L. Minimum-norm least squares followed by the affine
/// projection A -> A - Tr(rho_ss A) I.
CMatrix zero_mean_inverse(const QMarkovModel& model, const CMatrix& x);
CMatrix zero_mean_inverse(const QMarkovModel& model, const DensityOperator& rho_ss,
                          const CMatrix& x);

}  // namespace qio
