#include "qio/markov_qfi.hpp"

#include <cmath>
#include <vector>

#include "qio/error.hpp"
#include "qio/linalg.hpp"
#include "qio/quantum_fisher.hpp"

namespace qio {

CMatrix qfi_rate_unscaled(const QMarkovModel& model, std::span<const CMatrix> h_dots,
                          std::span<const CMatrix> l_dots) {
  require(h_dots.size() == l_dots.size() && !h_dots.empty(), "need matching non-empty direction lists");
  const DensityOperator rho = ergodic_stationary_state(model);
  const Index d = model.dim();
  const CMatrix& l = model.L();
  const CMatrix id = CMatrix::Identity(d, d);
  std::vector<CMatrix> g;
  g.reserve(h_dots.size());
  for (std::size_t a = 0; a < h_dots.size(); ++a) {
    require(h_dots[a].rows() == d && l_dots[a].rows() == d, "direction shape does not match the model");
    const CMatrix e = h_dots[a] + im_part(l_dots[a].adjoint() * l);
    const CMatrix edot = e - (rho.matrix() * e).trace() * id;
    const CMatrix x = zero_mean_inverse(model, rho, edot);
    g.push_back(l_dots[a] - kI * commutator(l, x));
  }
  const Index k = static_cast<Index>(g.size());
  CMatrix out(k, k);
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < k; ++b) out(a, b) = (rho.matrix() * g[a].adjoint() * g[b]).trace();
  return out;
}

Matrix qfi_rate(const QMarkovModel& model, std::span<const CMatrix> h_dots, std::span<const CMatrix> l_dots) {
  const CMatrix raw = qfi_rate_unscaled(model, h_dots, l_dots);
  const Matrix re = raw.real();
  return 2.0 * (re + re.transpose());
}

Matrix qfi_rate(const ParameterFamily& family, const Vector& theta) {
  std::vector<CMatrix> h_dots, l_dots;
  for (Index a = 0; a < family.k(); ++a) {
    h_dots.push_back(family.h_derivative(a, theta));
    l_dots.push_back(family.l_derivative(a, theta));
  }
  return qfi_rate(family.model(theta), h_dots, l_dots);
}

void GaugeElement::validate() const {
  require(W.rows() == W.cols() && W.rows() >= 1, "gauge unitary must be square");
  const CMatrix defect = W.adjoint() * W - CMatrix::Identity(W.rows(), W.cols());
  require(defect.norm() <= 1e-10, "gauge matrix is not unitary");
  require(std::isfinite(r), "Hamiltonian shift must be finite");
}

QMarkovModel gauge_transform(const QMarkovModel& model, const GaugeElement& g) {
  g.validate();
  require(g.W.rows() == model.dim(), "gauge unitary dimension does not match the model");
  const Index d = model.dim();
  const CMatrix h = g.W.adjoint() * (model.H() + g.r * CMatrix::Identity(d, d)) * g.W;
  return QMarkovModel(hermitian_part(h), g.W.adjoint() * model.L() * g.W);
}

double conditional_qfi(const ParameterFamily& family, double theta, const DensityOperator& rho0,
                       const MeasurementRecord& record, double h, const FilterOptions& filter) {
  require(family.k() == 1, "conditional_qfi needs a one-parameter family");
  if (h <= 0.0) h = 1e-4 * std::max(1.0, std::abs(theta));
  FilterOptions opt = filter;
  opt.keep_every = 0;
  const auto final_state = [&](double t) {
    return run_filter(family.model(Vector::Constant(1, t)), rho0, record, opt).final_state;
  };
  const CMatrix mid = final_state(theta);
  CMatrix drho = (final_state(theta + h) - final_state(theta - h)) / (2.0 * h);
  drho = hermitian_part(drho);
  drho -= (drho.trace() / static_cast<double>(drho.rows())) * CMatrix::Identity(drho.rows(), drho.cols());
  const CMatrix dirs[] = {drho};
  return qfi_matrix(DensityOperator(mid), dirs)(0, 0);
}

}  // namespace qio
