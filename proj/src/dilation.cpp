#include "homctl/dilation.hpp"

#include <cmath>
#include <string>

#include "homctl/errors.hpp"

namespace homctl {

namespace {

constexpr double kResidualTol = 1e-12;
constexpr double kTinyNorm = 1e-150;
constexpr int kMaxBracketSteps = 200;
constexpr int kMaxBisections = 80;
constexpr int kMaxNewton = 60;

void require_dim(const Dilation& d, const Vector& x, const char* what) {
  if (x.size() != d.dim()) {
    throw Error(ErrorKind::dimension, std::string(what) + ": vector has size " +
                                          std::to_string(x.size()) + ", dilation acts on R^" +
                                          std::to_string(d.dim()));
  }
}

// g(s) = ||d(-s) x|| - 1 together with dg/ds = -z^T P G z / ||z||, z = d(-s) x.
struct SphereResidual {
  double value;
  double slope;
};

SphereResidual sphere_residual(const Dilation& d, const Vector& x, double s) {
  const Vector z = d.matrix(-s) * x;
  const double norm = d.weighted_norm(z);
  const double slope = norm > 0 ? -z.dot(d.weight() * d.generator() * z) / norm : 0.0;
  return {norm - 1.0, slope};
}

}  // namespace

Dilation::Dilation(Matrix generator, Matrix weight)
    : generator_(std::move(generator)), weight_(std::move(weight)) {
  require_square(generator_, "Dilation generator");
  require_square(weight_, "Dilation weight");
  if (weight_.rows() != generator_.rows()) {
    throw Error(ErrorKind::dimension, "Dilation: generator and weight sizes differ");
  }
  require_finite(generator_, "Dilation generator");
  require_finite(weight_, "Dilation weight");
  const double asym = (weight_ - weight_.transpose()).norm();
  if (asym > 1e-10 * std::max(1.0, weight_.norm())) {
    throw Error(ErrorKind::domain, "Dilation: weight matrix is not symmetric");
  }
  weight_ = 0.5 * (weight_ + weight_.transpose());
}

Matrix Dilation::matrix(double s) const { return expm(s * generator_); }

double Dilation::weighted_norm(const Vector& x) const {
  return std::sqrt(std::max(0.0, x.dot(weight_ * x)));
}

bool Dilation::is_anti_hurwitz() const {
  for (const auto& lambda : eigenvalues(generator_)) {
    if (!(lambda.real() > 0.0)) return false;
  }
  return true;
}

Vector dilate(const Dilation& d, double s, const Vector& x) {
  require_dim(d, x, "dilate");
  return d.matrix(s) * x;
}

bool check_strict_monotonicity(const Dilation& d) {
  const Matrix& p = d.weight();
  const Matrix& g = d.generator();
  return is_positive_definite(p) && is_positive_definite(p * g + g.transpose() * p);
}

double hom_norm(const Dilation& d, const Vector& x) {
  require_dim(d, x, "hom_norm");
  require_finite(x, "hom_norm");
  const double base = d.weighted_norm(x);
  if (base < kTinyNorm) return 0.0;

  // g is strictly decreasing in s for a strictly monotone dilation; bracket
  // the root by doubling outward from ln ||x||.
  const double s0 = std::log(base);
  double lo = s0;
  double hi = s0;
  double step = 1.0;
  double g_lo = sphere_residual(d, x, lo).value;
  double g_hi = g_lo;
  int expansions = 0;
  while (g_lo < 0.0 && expansions++ < kMaxBracketSteps) {
    hi = lo;
    g_hi = g_lo;
    lo -= step;
    step *= 2.0;
    g_lo = sphere_residual(d, x, lo).value;
  }
  while (g_hi > 0.0 && expansions++ < kMaxBracketSteps) {
    lo = hi;
    g_lo = g_hi;
    hi += step;
    step *= 2.0;
    g_hi = sphere_residual(d, x, hi).value;
  }
  if (!(g_lo >= 0.0 && g_hi <= 0.0)) {
    throw Error(ErrorKind::convergence, "hom_norm: failed to bracket the unit sphere crossing");
  }
  if (g_lo == 0.0) return std::exp(lo);
  if (g_hi == 0.0) return std::exp(hi);

  // Bisection to a coarse residual, then Newton for the last digits.
  double s = 0.5 * (lo + hi);
  SphereResidual r = sphere_residual(d, x, s);
  for (int i = 0; i < kMaxBisections && std::abs(r.value) > 1e-6; ++i) {
    if (r.value > 0.0) {
      lo = s;
    } else {
      hi = s;
    }
    s = 0.5 * (lo + hi);
    r = sphere_residual(d, x, s);
  }
  for (int i = 0; i < kMaxNewton && std::abs(r.value) > kResidualTol; ++i) {
    if (r.value > 0.0) {
      lo = s;
    } else {
      hi = s;
    }
    double next = r.slope < 0.0 ? s - r.value / r.slope : 0.5 * (lo + hi);
    if (!(next >= lo && next <= hi) || next == s) next = 0.5 * (lo + hi);
    s = next;
    r = sphere_residual(d, x, s);
  }
  if (std::abs(r.value) > kResidualTol) {
    throw Error(ErrorKind::convergence,
                "hom_norm: residual " + std::to_string(std::abs(r.value)) +
                    " above tolerance; is the dilation strictly monotone?");
  }
  return std::exp(s);
}

Vector hom_norm_gradient(const Dilation& d, const Vector& x) {
  require_dim(d, x, "hom_norm_gradient");
  const double nx = hom_norm(d, x);
  if (nx == 0.0) throw Error(ErrorKind::domain, "hom_norm_gradient: undefined at the origin");
  const Matrix scale = d.matrix(-std::log(nx));
  const Vector z = scale * x;
  const Vector pz = d.weight() * z;
  const double denom = z.dot(d.weight() * d.generator() * z);
  return nx * (scale.transpose() * pz) / denom;
}

}  // namespace homctl
