#pragma once

#include <vector>

#include "qio/operator_core.hpp"

namespace qio {

/// Axis-aligned parameter domain [lower, upper].
struct Box {
  Vector lower;
  Vector upper;

  static Box interval(double lo, double hi);

  Index size() const { return lower.size(); }
  bool contains(const Vector& theta, double slack = 0.0) const;
  Vector clamp(const Vector& theta) const;
  void validate() const;
};

/// theta -> (H + sum theta_a Hdot_a, L + sum theta_a Ldot_a), or the phase
/// family theta -> (H, e^{-i theta} L).
class ParameterFamily {
 public:
  /// Direction lists must have equal length k >= 1; Hamiltonian directions
  /// must be Hermitian (1e-12).
  static ParameterFamily affine(QMarkovModel base, std::vector<CMatrix> h_dirs, std::vector<CMatrix> l_dirs,
                                Box domain);
  static ParameterFamily phase(QMarkovModel base, Box domain);

  Index k() const { return domain_.size(); }
  bool is_phase() const { return phase_; }
  const QMarkovModel& base() const { return base_; }
  const Box& domain() const { return domain_; }
  const std::vector<CMatrix>& h_dirs() const { return h_dirs_; }
  const std::vector<CMatrix>& l_dirs() const { return l_dirs_; }

  QMarkovModel model(const Vector& theta) const;
  CMatrix h_derivative(Index a, const Vector& theta) const;
  CMatrix l_derivative(Index a, const Vector& theta) const;

 private:
  ParameterFamily(QMarkovModel base, Box domain) : base_(std::move(base)), domain_(std::move(domain)) {}

  QMarkovModel base_;
  Box domain_;
  std::vector<CMatrix> h_dirs_;
  std::vector<CMatrix> l_dirs_;
  bool phase_ = false;
};

}  // namespace qio
