#include "homctl/control_laws.hpp"

#include <algorithm>
#include <cmath>

#include "homctl/errors.hpp"

namespace homctl {

const char* to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::prescribed_time: return "prescribed_time";
    case ControllerKind::prescribed_time_robust: return "prescribed_time_robust";
    case ControllerKind::fixed_time: return "fixed_time";
    case ControllerKind::linear: return "linear";
  }
  return "unknown";
}

std::optional<ControllerKind> parse_controller_kind(const std::string& name) {
  for (auto kind : {ControllerKind::prescribed_time, ControllerKind::prescribed_time_robust,
                    ControllerKind::fixed_time, ControllerKind::linear}) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

ControlContext::ControlContext(const SynthesizedController& controller, ControllerKind kind,
                               Vector x0_ref)
    : controller_(controller),
      kind_(kind),
      x0_ref_(std::move(x0_ref)),
      dilation_(controller.dilation()) {
  if (x0_ref_.size() != dilation_.dim()) {
    throw Error(ErrorKind::dimension, "ControlContext: reference state has the wrong size");
  }
  require_finite(x0_ref_, "ControlContext reference state");
  k_scaled_ = controller_.K * controller_.time_scaling();
  linear_gain_ = controller_.K0 + k_scaled_;
  ref_norm_ = dilation_.weighted_norm(x0_ref_);
}

bool ControlContext::homogeneous() const noexcept {
  return kind_ != ControllerKind::linear && ref_norm_ > 0.0;
}

double ControlContext::scaled_reference() const noexcept {
  return kind_ == ControllerKind::fixed_time ? std::max(ref_norm_, 1.0) : ref_norm_;
}

double ControlContext::reading(const Vector& x) const {
  if (!homogeneous()) throw Error(ErrorKind::domain, "reading: controller has no homogeneous branch");
  return hom_norm(dilation_, x / scaled_reference());
}

std::optional<double> ControlContext::clamped_reading(const Vector& x, bool* clamped) const {
  const double s = reading(x);
  *clamped = false;
  if (kind_ == ControllerKind::prescribed_time) return s;
  if (s >= 1.0) {
    *clamped = true;
    return 1.0;
  }
  return s;
}

ControlEvaluation ControlContext::evaluate(const Vector& x) const {
  if (x.size() != dilation_.dim()) throw Error(ErrorKind::dimension, "eval_control: state has the wrong size");
  if (!x.allFinite()) throw Error(ErrorKind::domain, "eval_control: non-finite state");

  ControlEvaluation out;
  if (kind_ == ControllerKind::linear) {
    out.u = linear_gain_ * x;
    return out;
  }
  if (ref_norm_ == 0.0) {
    out.u = kind_ == ControllerKind::prescribed_time ? Vector(controller_.K0 * x) : Vector(linear_gain_ * x);
    return out;
  }
  if (dilation_.weighted_norm(x) == 0.0) {
    // Filippov selection at the origin: zero keeps the origin invariant.
    out.u = Vector::Zero(controller_.K0.rows());
    out.reading = 0.0;
    return out;
  }
  out.reading = reading(x);
  const double s = *out.reading;
  double s_used = s;
  if (kind_ != ControllerKind::prescribed_time && s >= 1.0) {
    s_used = 1.0;
    out.clamped = true;
  }
  if (s_used == 0.0) {
    // Below the root finder's resolution; same selection as at the origin.
    out.u = Vector::Zero(controller_.K0.rows());
    return out;
  }
  out.u = controller_.K0 * x + k_scaled_ * (dilation_.matrix(-std::log(s_used)) * x);
  return out;
}

Matrix ControlContext::gain_matrix(const Vector& x) const {
  if (x.size() != dilation_.dim()) throw Error(ErrorKind::dimension, "gain_matrix: state has the wrong size");
  if (ref_norm_ == 0.0) throw Error(ErrorKind::domain, "gain_matrix: reference state is zero");
  if (dilation_.weighted_norm(x) == 0.0) throw Error(ErrorKind::domain, "gain_matrix: state is zero");
  if (kind_ == ControllerKind::linear) return linear_gain_;
  bool clamped = false;
  const double s = *clamped_reading(x, &clamped);
  if (s == 0.0) throw Error(ErrorKind::domain, "gain_matrix: state below homogeneous-norm resolution");
  return controller_.K0 + k_scaled_ * dilation_.matrix(-std::log(s));
}

}  // namespace homctl
