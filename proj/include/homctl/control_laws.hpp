#pragma once

#include <optional>
#include <string>

#include "homctl/dilation.hpp"
#include "homctl/synthesis.hpp"

namespace homctl {

enum class ControllerKind {
  prescribed_time,         // unclamped homogeneous feedback
  prescribed_time_robust,  // clamped at s = 1 (u_ct)
  fixed_time,              // clamped, reference norm floored at 1 (u_fxt)
  linear,                  // (K0 + K d(-ln T)) x
};

const char* to_string(ControllerKind kind);
std::optional<ControllerKind> parse_controller_kind(const std::string& name);

/// Result of one control evaluation with the diagnostics the simulator logs.
struct ControlEvaluation {
  Vector u;
  /// ||x / r||_d with r the kind's reference norm; nullopt when the law does
  /// not use the homogeneous norm (linear regimes).
  std::optional<double> reading;
  /// min{1, s} clamp was active.
  bool clamped = false;
};

/// State-dependent static feedback u = K(x, x0) x. The reference initial state
/// is fixed for the lifetime of one closed-loop run.
class ControlContext {
 public:
  ControlContext(const SynthesizedController& controller, ControllerKind kind, Vector x0_ref);

  ControllerKind kind() const noexcept { return kind_; }
  const Dilation& dilation() const noexcept { return dilation_; }
  const Vector& x0_ref() const noexcept { return x0_ref_; }
  const SynthesizedController& controller() const noexcept { return controller_; }

  /// ||x0_ref|| in the weighted norm, before any flooring.
  double reference_norm() const noexcept { return ref_norm_; }

  /// Whether this context evaluates the homogeneous (nonlinear) branch.
  bool homogeneous() const noexcept;

  ControlEvaluation evaluate(const Vector& x) const;
  Vector eval_control(const Vector& x) const { return evaluate(x).u; }

  /// K0 + K d(-ln T) d(-ln s) for the kind's clamp; x != 0 and x0_ref != 0.
  Matrix gain_matrix(const Vector& x) const;

  /// ||x / r||_d with the kind's reference norm r (no clamp).
  double reading(const Vector& x) const;

  /// K0 + K d(-ln T).
  const Matrix& linear_gain() const noexcept { return linear_gain_; }

 private:
  double scaled_reference() const noexcept;
  std::optional<double> clamped_reading(const Vector& x, bool* clamped) const;

  SynthesizedController controller_;
  ControllerKind kind_;
  Vector x0_ref_;
  Dilation dilation_;
  Matrix k_scaled_;     // K d(-ln T)
  Matrix linear_gain_;  // K0 + K d(-ln T)
  double ref_norm_ = 0.0;
};

}  // namespace homctl
