#pragma once

#include <cstddef>
#include <vector>

#include "homctl/matrix_core.hpp"
#include "homctl/synthesis.hpp"

namespace homctl {

/// Precomputed pieces of the Artstein transformation for ZOH inputs:
/// y = e^{A tau} x + sum_j Phi_j u(t - j h), Phi_j = e^{(j-1) h A} Gamma(h).
struct PredictorTables {
  double step = 0.0;
  double delay = 0.0;
  std::size_t horizon = 0;  // N = tau / h
  Matrix transition;        // e^{A tau}
  Matrix inverse_transition;
  Matrix step_transition;   // e^{A h}
  Matrix step_input;        // Gamma(h)
  std::vector<Matrix> kernels;  // Phi_1 .. Phi_N

  Eigen::Index state_dim() const noexcept { return transition.rows(); }
  Eigen::Index input_dim() const noexcept { return step_input.cols(); }
};

/// Number of whole steps in `delay`; throws ErrorKind::config when delay is
/// not an integer multiple of `step`.
std::size_t delay_steps(double delay, double step);

PredictorTables build_tables(const LinearPlant& plant, double step);

/// Last N applied controls, newest first: at(j) = u(t - j h) for j = 1..N.
class ControlHistory {
 public:
  ControlHistory(std::size_t horizon, Eigen::Index input_dim);

  /// History initialised with phi = 0 on (-tau, 0).
  static ControlHistory zeros(std::size_t horizon, Eigen::Index input_dim);

  /// History initialised from phi samples; samples[j - 1] = phi(-j h).
  static ControlHistory from_samples(const std::vector<Vector>& samples);

  std::size_t horizon() const noexcept { return buffer_.size(); }
  Eigen::Index input_dim() const noexcept { return input_dim_; }
  bool filled() const noexcept { return count_ >= buffer_.size(); }

  /// Appends the control applied over the step that just ended.
  void push(const Vector& u);

  /// u(t - j h), 1 <= j <= N.
  const Vector& at(std::size_t j) const;

  /// Oldest entry, u(t - N h): the input currently reaching the plant.
  const Vector& oldest() const { return at(horizon()); }

 private:
  std::vector<Vector> buffer_;
  std::size_t head_ = 0;  // slot holding at(1)
  std::size_t count_ = 0;
  Eigen::Index input_dim_;
};

/// sum_j Phi_j u(t - j h).
Vector history_integral(const PredictorTables& tables, const ControlHistory& hist);

Vector predict(const PredictorTables& tables, const Vector& x, const ControlHistory& hist);
Vector invert(const PredictorTables& tables, const Vector& y, const ControlHistory& hist);

}  // namespace homctl
