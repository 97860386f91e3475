#pragma once

#include "homctl/matrix_core.hpp"

namespace homctl {

/// Linear dilation group d(s) = e^{s G} paired with the weighted Euclidean
/// norm ||x|| = sqrt(x^T P x) that induces the canonical homogeneous norm.
///
/// Construction only checks shapes, finiteness and symmetry of P. Whether the
/// pair is a strictly monotone dilation is a separate question answered by
/// check_strict_monotonicity(), so non-monotone pairs can still be inspected.
class Dilation {
 public:
  Dilation(Matrix generator, Matrix weight);

  const Matrix& generator() const noexcept { return generator_; }
  const Matrix& weight() const noexcept { return weight_; }
  Eigen::Index dim() const noexcept { return generator_.rows(); }

  /// e^{s G}.
  Matrix matrix(double s) const;

  /// sqrt(x^T P x).
  double weighted_norm(const Vector& x) const;

  /// All eigenvalues of G have positive real part.
  bool is_anti_hurwitz() const;

 private:
  Matrix generator_;
  Matrix weight_;
};

Vector dilate(const Dilation& d, double s, const Vector& x);

/// P G + G^T P > 0 and P > 0.
bool check_strict_monotonicity(const Dilation& d);

/// Canonical homogeneous norm: e^{s_x} with ||d(-s_x) x|| = 1, and 0 at the
/// origin. Inputs with ||x|| below 1e-150 are treated as the origin.
double hom_norm(const Dilation& d, const Vector& x);

/// Gradient of hom_norm at x != 0.
Vector hom_norm_gradient(const Dilation& d, const Vector& x);

}  // namespace homctl
