#include "qio/family.hpp"

#include <cmath>

#include "qio/error.hpp"
#include "qio/linalg.hpp"

namespace qio {

Box Box::interval(double lo, double hi) {
  Box b{Vector::Constant(1, lo), Vector::Constant(1, hi)};
  b.validate();
  return b;
}

void Box::validate() const {
  require(lower.size() >= 1 && lower.size() == upper.size(), "domain bounds must have equal non-zero length");
  require(lower.allFinite() && upper.allFinite(), "domain must be bounded");
  require((lower.array() <= upper.array()).all(), "domain lower bound exceeds upper bound");
}

bool Box::contains(const Vector& theta, double slack) const {
  return theta.size() == size() && (theta.array() >= lower.array() - slack).all() &&
         (theta.array() <= upper.array() + slack).all();
}

Vector Box::clamp(const Vector& theta) const { return theta.cwiseMax(lower).cwiseMin(upper); }

ParameterFamily ParameterFamily::affine(QMarkovModel base, std::vector<CMatrix> h_dirs, std::vector<CMatrix> l_dirs,
                                        Box domain) {
  domain.validate();
  require(h_dirs.size() == l_dirs.size(), "h_dirs and l_dirs must have equal length");
  require(static_cast<Index>(h_dirs.size()) == domain.size(), "direction count must match the domain dimension");
  const Index d = base.dim();
  for (std::size_t a = 0; a < h_dirs.size(); ++a) {
    require(h_dirs[a].rows() == d && h_dirs[a].cols() == d, "Hamiltonian direction has the wrong shape");
    require(l_dirs[a].rows() == d && l_dirs[a].cols() == d, "coupling direction has the wrong shape");
    require(hermiticity_defect(h_dirs[a]) <= 1e-12, "Hamiltonian direction must be Hermitian");
    h_dirs[a] = hermitian_part(h_dirs[a]);
  }
  ParameterFamily f(std::move(base), std::move(domain));
  f.h_dirs_ = std::move(h_dirs);
  f.l_dirs_ = std::move(l_dirs);
  return f;
}

ParameterFamily ParameterFamily::phase(QMarkovModel base, Box domain) {
  domain.validate();
  require(domain.size() == 1, "the phase family has one parameter");
  ParameterFamily f(std::move(base), std::move(domain));
  f.phase_ = true;
  return f;
}

QMarkovModel ParameterFamily::model(const Vector& theta) const {
  require(theta.size() == k(), "parameter vector has the wrong length");
  if (phase_) return QMarkovModel(base_.H(), std::exp(-kI * theta(0)) * base_.L());
  CMatrix h = base_.H();
  CMatrix l = base_.L();
  for (Index a = 0; a < k(); ++a) {
    h += theta(a) * h_dirs_[a];
    l += theta(a) * l_dirs_[a];
  }
  return QMarkovModel(h, l);
}

CMatrix ParameterFamily::h_derivative(Index a, const Vector& theta) const {
  require(a >= 0 && a < k() && theta.size() == k(), "parameter index out of range");
  if (phase_) return CMatrix::Zero(base_.dim(), base_.dim());
  return h_dirs_[a];
}

CMatrix ParameterFamily::l_derivative(Index a, const Vector& theta) const {
  require(a >= 0 && a < k() && theta.size() == k(), "parameter index out of range");
  if (phase_) return -kI * std::exp(-kI * theta(0)) * base_.L();
  return l_dirs_[a];
}

}  // namespace qio
