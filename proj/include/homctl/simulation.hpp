#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "homctl/control_laws.hpp"
#include "homctl/delay_predictor.hpp"
#include "homctl/synthesis.hpp"

namespace homctl {

// Additive plant perturbation q2(t).
struct NoDisturbance {};
/// q2(t) = B * 1_m * amplitude * sin(omega t).
struct MatchedSinusoid {
  double amplitude = 1.0;
  double omega = 5.0;
};
struct ConstantDisturbance {
  Vector value;
};
/// Piecewise-linear in time, held constant outside the table.
struct TableDisturbance {
  std::vector<double> times;
  std::vector<Vector> values;
};
using DisturbanceSpec = std::variant<NoDisturbance, MatchedSinusoid, ConstantDisturbance, TableDisturbance>;

Vector disturbance_at(const DisturbanceSpec& spec, const Matrix& B, double t);
bool is_active(const DisturbanceSpec& spec);

/// Measurement noise q1: uniform on [-amplitude, amplitude] per component,
/// drawn once per sample from a seeded generator. amplitude == 0 disables it.
struct NoiseSpec {
  double amplitude = 0.0;
  std::uint64_t seed = 0;

  bool active() const noexcept { return amplitude > 0.0; }
};

/// splitmix64; small, seedable and identical on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// Uniform on [-1, 1).
  double symmetric_unit();

 private:
  std::uint64_t state_;
};

enum class IntegratorMode { zoh_exact, dense_rk };

const char* to_string(IntegratorMode mode);

struct ScenarioConfig {
  LinearPlant plant;
  SynthesizedController controller;
  ControllerKind kind = ControllerKind::prescribed_time_robust;
  Vector x0;
  /// Error on the reference initial state; only the controller sees it.
  std::optional<Vector> x0_noise;
  double h = 0.01;
  double t_end = 2.0;
  DisturbanceSpec disturbance = NoDisturbance{};
  NoiseSpec noise;
  /// phi(-j h) for j = 1..N; empty means phi = 0.
  std::vector<Vector> phi;
  IntegratorMode integrator = IntegratorMode::zoh_exact;
  /// Defaults to 1e-9 for unperturbed runs and 1e-6 otherwise.
  std::optional<double> settle_epsilon;
  /// Defaults to h / T.
  std::optional<double> snap_delta;
  /// Snap-to-zero is also kept for a matched disturbance that stays inside
  /// the robustness bound of the robust or fixed-time law; never with noise.
  bool snap_enabled = true;

  bool perturbed() const;
  double effective_settle_epsilon() const;
  double effective_snap_delta() const;
  void validate() const;
};

struct TraceEvent {
  double t = 0.0;
  std::string kind;  // "clamp_on", "clamp_off", "snap", "plant_snap"
  std::string detail;
};

struct SimulationTrace {
  std::vector<double> t;
  std::vector<Vector> x;
  std::vector<Vector> u;
  std::vector<Vector> y;  // empty unless the plant has an input delay
  std::vector<double> s;  // homogeneous-norm reading; NaN where undefined
  std::vector<TraceEvent> events;
  std::optional<double> settling_time;
  double settle_epsilon = 0.0;
  Eigen::Index state_dim = 0;
  Eigen::Index input_dim = 0;

  std::size_t size() const noexcept { return t.size(); }
  bool has_predictor() const noexcept { return !y.empty(); }
  bool settled() const noexcept { return settling_time.has_value(); }
  /// max_k ||x_k|| (Euclidean).
  double max_norm() const;
  /// max ||x_k|| over samples with t_k >= from.
  double max_norm_after(double from) const;
};

/// Sampled-data closed loop with exact ZOH propagation.
SimulationTrace simulate(const ScenarioConfig& cfg);

/// Adaptive Dormand-Prince integration of the continuous-time loop (delay-free,
/// noise-free), stopped once the reading drops below `stop_reading`.
SimulationTrace simulate_dense(const ScenarioConfig& cfg, double stop_reading = 0.02,
                               double tolerance = 1e-10);

/// First t_k after which every remaining ||x_j|| <= epsilon.
std::optional<double> measure_settling(const SimulationTrace& trace, double epsilon);

/// ||x0|| lambda_min(X^{-1/2} Gd X^{1/2} + X^{1/2} Gd^T X^{-1/2}) / (2 rho T);
/// for the fixed-time law ||x0|| is replaced by max{1, ||x0||}.
double disturbance_bound(const SynthesizedController& controller, double x0_norm, double rho,
                         ControllerKind kind = ControllerKind::prescribed_time_robust);

/// CSV: t,x1..xn,u1..um,s,settled[,y1..yn], 17 significant digits.
void write_trace_csv(std::ostream& os, const SimulationTrace& trace);

}  // namespace homctl
