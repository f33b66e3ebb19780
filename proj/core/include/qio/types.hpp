#pragma once

#include <complex>

#include <Eigen/Dense>

namespace qio {

using cplx = std::complex<double>;
using Index = Eigen::Index;

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

}  // namespace qio
