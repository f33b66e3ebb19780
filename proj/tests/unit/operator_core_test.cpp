#include <gtest/gtest.h>

#include <algorithm>
#include <complex>
#include <vector>

#include "fixtures.hpp"
#include "qio/error.hpp"
#include "qio/operator_core.hpp"
#include "qio/quantum_fisher.hpp"
#include "qio/random.hpp"

namespace qio {
namespace {

using testing::driven_qubit;
using testing::max_abs_diff;

CMatrix ket_bra(Index dim, Index i, Index j) {
  CMatrix m = CMatrix::Zero(dim, dim);
  m(i, j) = 1.0;
  return m;
}

TEST(LindbladGenerator, ZeroModelGivesZeroSuperoperator) {
  const CMatrix zero = CMatrix::Zero(2, 2);
  const Superoperator s = lindblad_generator(QMarkovModel(zero, zero), Picture::schrodinger);
  EXPECT_EQ(max_abs(s.matrix), 0.0);
}

TEST(LindbladGenerator, PureHamiltonianMatchesCommutator) {
  CMatrix sz(2, 2);
  sz << 1, 0, 0, -1;
  const QMarkovModel m(sz, CMatrix::Zero(2, 2));
  const CMatrix x = pauli::x();
  const CMatrix expected = kI * (x * sz - sz * x);
  const CMatrix got = lindblad_generator(m, Picture::schrodinger).apply(x);
  EXPECT_LE(max_abs_diff(got, expected), 1e-14);
  EXPECT_LE(max_abs_diff(got, 2.0 * pauli::y()), 1e-14);
}

TEST(LindbladGenerator, DecayMovesExcitedToGround) {
  const QMarkovModel m(CMatrix::Zero(2, 2), pauli::lower());
  const CMatrix got = lindblad_generator(m, Picture::schrodinger).apply(ket_bra(2, 1, 1));
  EXPECT_LE(max_abs_diff(got, ket_bra(2, 0, 0) - ket_bra(2, 1, 1)), 1e-14);
}

TEST(LindbladGenerator, DualityAndTracePreservation) {
  RandomStream rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const QMarkovModel m(random_hermitian(3, rng), random_complex(3, rng));
    const Superoperator s = lindblad_generator(m, Picture::schrodinger);
    const Superoperator h = lindblad_generator(m, Picture::heisenberg);
    const CMatrix x = random_complex(3, rng), y = random_complex(3, rng);
    EXPECT_LE(std::abs((y * s.apply(x)).trace() - (h.apply(y) * x).trace()), 1e-10);
    EXPECT_LE(std::abs(s.apply(x).trace()), 1e-10);
    EXPECT_LE(max_abs(h.apply(CMatrix::Identity(3, 3))), 1e-10);
  }
}

TEST(StationaryState, DecayGivesGroundState) {
  const QMarkovModel m(CMatrix::Zero(2, 2), pauli::lower());
  const DensityOperator rho = stationary_state(m);
  EXPECT_LE(max_abs_diff(rho.matrix(), ket_bra(2, 0, 0)), 1e-10);
  EXPECT_FALSE(is_full_rank(rho));
  EXPECT_FALSE(spectral_info(m).is_ergodic);
  EXPECT_TRUE(spectral_info(m).is_unique);
}

TEST(StationaryState, DrivenQubitMatchesResonanceFluorescence) {
  // Excited population Omega^2 / (kappa^2 + 2 Omega^2) for resonant driving.
  for (double omega : {0.5, 1.0, 3.0}) {
    const QMarkovModel m = driven_qubit(omega, 1.0);
    const DensityOperator rho = stationary_state(m);
    EXPECT_NEAR(rho.matrix()(1, 1).real(), omega * omega / (1.0 + 2.0 * omega * omega), 1e-10);
    EXPECT_LE(max_abs(lindblad_generator(m, Picture::schrodinger).apply(rho.matrix())), 1e-10);
    EXPECT_TRUE(is_full_rank(rho));
    EXPECT_TRUE(spectral_info(m).is_ergodic);
  }
}

TEST(StationaryState, CommutingHamiltonianIsNotUnique) {
  const QMarkovModel m(pauli::z(), CMatrix::Zero(2, 2));
  try {
    stationary_state(m);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::non_unique_stationary_state);
  }
}

TEST(SpectralInfo, DecayingQubitSpectrum) {
  const SpectralInfo info = spectral_info(QMarkovModel(CMatrix::Zero(2, 2), pauli::lower()));
  std::vector<double> re;
  for (const cplx& z : info.eigenvalues) {
    re.push_back(z.real());
    EXPECT_LE(std::abs(z.imag()), 1e-12);
  }
  std::sort(re.begin(), re.end());
  ASSERT_EQ(re.size(), 4u);
  EXPECT_NEAR(re[0], -1.0, 1e-12);
  EXPECT_NEAR(re[1], -0.5, 1e-12);
  EXPECT_NEAR(re[2], -0.5, 1e-12);
  EXPECT_NEAR(re[3], 0.0, 1e-12);
  EXPECT_NEAR(info.gap, 0.5, 1e-12);
}

TEST(SpectralInfo, ZeroGeneratorHasNoGap) {
  const SpectralInfo info = spectral_info(QMarkovModel(CMatrix::Zero(2, 2), CMatrix::Zero(2, 2)));
  EXPECT_EQ(info.gap, 0.0);
  EXPECT_FALSE(info.is_ergodic);
}

TEST(Sld, MaximallyMixedState) {
  const DensityOperator rho = DensityOperator::maximally_mixed(2);
  EXPECT_LE(max_abs_diff(sld(rho, 0.3 * pauli::z()), 0.6 * pauli::z()), 1e-14);
  EXPECT_EQ(max_abs(sld(rho, CMatrix::Zero(2, 2))), 0.0);
}

TEST(Sld, LyapunovResidualOnRandomState) {
  RandomStream rng(5);
  const DensityOperator rho(random_density(3, rng));
  CMatrix drho = random_hermitian(3, rng);
  drho -= drho.trace() / 3.0 * CMatrix::Identity(3, 3);
  const CMatrix s = sld(rho, drho);
  EXPECT_LE(max_abs(CMatrix(0.5 * (s * rho.matrix() + rho.matrix() * s) - drho)), 1e-9);
}

TEST(Sld, SingularStateRejectsOffRangeDerivative) {
  const DensityOperator rho = DensityOperator::basis_state(2, 0);
  try {
    sld(rho, pauli::z());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::singular_state);
  }
}

TEST(QfiMatrix, PauliDirectionsGiveIdentity) {
  const std::vector<CMatrix> d{0.5 * pauli::x(), 0.5 * pauli::z()};
  const Matrix f = qfi_matrix(DensityOperator::maximally_mixed(2), d);
  EXPECT_LE(max_abs_diff(f, Matrix::Identity(2, 2)), 1e-14);
  const std::vector<CMatrix> none{CMatrix::Zero(2, 2)};
  EXPECT_EQ(qfi_matrix(DensityOperator::maximally_mixed(2), none)(0, 0), 0.0);
}

TEST(QfiMatrix, NearlyPureStateMatchesPureFormula) {
  RandomStream rng(17);
  const Index d = 3;
  CVector psi = random_unitary(d, rng).col(0);
  const CMatrix g = random_hermitian(d, rng);
  const double eps = 1e-6;
  const CMatrix rho = (1.0 - eps) * psi * psi.adjoint() + eps / static_cast<double>(d) * CMatrix::Identity(d, d);
  const std::vector<CMatrix> drho{-kI * (g * rho - rho * g)};
  const Matrix f = qfi_matrix(DensityOperator(rho), drho);
  EXPECT_NEAR(f(0, 0), pure_state_qfi(psi, g), 1e-3);
}

TEST(QfiMatrix, RandomQfiIsPsd) {
  RandomStream rng(23);
  const DensityOperator rho(random_density(4, rng));
  std::vector<CMatrix> d;
  for (int a = 0; a < 3; ++a) {
    CMatrix x = random_hermitian(4, rng);
    d.push_back(x - x.trace() / 4.0 * CMatrix::Identity(4, 4));
  }
  const Matrix f = qfi_matrix(rho, d);
  EXPECT_LE(max_abs_diff(f, Matrix(f.transpose())), 1e-12);
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(f).eigenvalues().minCoeff(), -1e-9);
  EXPECT_GT(trivial_mse_bound(f), 0.0);
}

TEST(PureStateQfi, Examples) {
  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(pure_state_qfi(plus, 0.5 * pauli::z()), 1.0, 1e-14);
  CVector up(2);
  up << 1.0, 0.0;
  EXPECT_NEAR(pure_state_qfi(up, pauli::z()), 0.0, 1e-14);

  RandomStream rng(3);
  const CVector psi = random_unitary(4, rng).col(1);
  const CMatrix g = random_hermitian(4, rng);
  const double m1 = psi.dot(g * psi).real();
  const double m2 = psi.dot(g * g * psi).real();
  EXPECT_NEAR(pure_state_qfi(psi, g), 4.0 * (m2 - m1 * m1), 1e-12);
}

TEST(ZeroMeanInverse, ZeroMapsToZero) {
  EXPECT_LE(max_abs(zero_mean_inverse(driven_qubit(), CMatrix::Zero(2, 2))), 1e-14);
}

TEST(ZeroMeanInverse, RightInverseOnDrivenQubit) {
  const QMarkovModel m = driven_qubit();
  const DensityOperator rho = stationary_state(m);
  const CMatrix n = m.L().adjoint() * m.L();
  const CMatrix x = n - (rho.matrix() * n).trace() * CMatrix::Identity(2, 2);
  const CMatrix a = zero_mean_inverse(m, x);
  EXPECT_LE(max_abs(CMatrix(lindblad_generator(m, Picture::heisenberg).apply(a) - x)), 1e-8);
  EXPECT_LE(std::abs((rho.matrix() * a).trace()), 1e-8);
}

TEST(ZeroMeanInverse, IdentityIsNotZeroMean) {
  try {
    zero_mean_inverse(driven_qubit(), CMatrix::Identity(2, 2));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::not_zero_mean);
  }
}

TEST(DensityOperator, RejectsBadTrace) {
  EXPECT_THROW(DensityOperator(CMatrix::Identity(2, 2)), Error);
}

TEST(QMarkovModel, RejectsNonHermitianHamiltonian) {
  EXPECT_THROW(QMarkovModel(pauli::lower(), pauli::lower()), Error);
}

}  // namespace
}  // namespace qio
