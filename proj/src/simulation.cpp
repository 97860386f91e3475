#include "homctl/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <boost/numeric/odeint.hpp>

#include "homctl/errors.hpp"

namespace homctl {

namespace {

constexpr int kDisturbanceSubsteps = 16;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Weights W_i with int_{t_k}^{t_k + h} e^{A(t_k + h - s)} q(s) ds ~= sum_i W_i q(t_k + (i + 1/2) delta).
std::vector<Matrix> disturbance_weights(const Matrix& a, double h) {
  const Eigen::Index n = a.rows();
  const double delta = h / kDisturbanceSubsteps;
  const Matrix sub_integral = zoh_integral(a, Matrix::Identity(n, n), delta);
  const Matrix sub_transition = expm(delta * a);
  std::vector<Matrix> weights(kDisturbanceSubsteps);
  Matrix power = Matrix::Identity(n, n);
  for (int i = kDisturbanceSubsteps - 1; i >= 0; --i) {
    weights[static_cast<std::size_t>(i)] = power * sub_integral;
    power = power * sub_transition;
  }
  return weights;
}

ScenarioConfig checked(const ScenarioConfig& cfg) {
  cfg.validate();
  return cfg;
}

// q2 = B w with w recovered by least squares; nullopt if q2 leaves range(B).
std::optional<Vector> matched_part(const Matrix& B, const Vector& q) {
  const Vector w = B.completeOrthogonalDecomposition().solve(q);
  if ((B * w - q).norm() > 1e-12 * std::max(1.0, q.norm())) return std::nullopt;
  return w;
}

// sup_t ||q2(t)|| in the controller's weighted norm, or nullopt when q2 is
// not matched.
std::optional<double> matched_sup(const DisturbanceSpec& spec, const Matrix& B, const Dilation& dil) {
  return std::visit(
      overloaded{
          [&](const NoDisturbance&) -> std::optional<double> { return 0.0; },
          [&](const MatchedSinusoid& d) -> std::optional<double> {
            return std::abs(d.amplitude) * dil.weighted_norm(B * Vector::Ones(B.cols()));
          },
          [&](const ConstantDisturbance& d) -> std::optional<double> {
            if (!matched_part(B, d.value)) return std::nullopt;
            return dil.weighted_norm(d.value);
          },
          [&](const TableDisturbance& d) -> std::optional<double> {
            double sup = 0.0;
            for (const auto& v : d.values) {
              if (!matched_part(B, v)) return std::nullopt;
              sup = std::max(sup, dil.weighted_norm(v));
            }
            return sup;
          },
      },
      spec);
}

}  // namespace

Vector disturbance_at(const DisturbanceSpec& spec, const Matrix& B, double t) {
  const Eigen::Index n = B.rows();
  return std::visit(
      overloaded{
          [&](const NoDisturbance&) -> Vector { return Vector::Zero(n); },
          [&](const MatchedSinusoid& d) -> Vector {
            return B * Vector::Constant(B.cols(), d.amplitude * std::sin(d.omega * t));
          },
          [&](const ConstantDisturbance& d) -> Vector { return d.value; },
          [&](const TableDisturbance& d) -> Vector {
            if (d.times.empty()) return Vector::Zero(n);
            if (t <= d.times.front()) return d.values.front();
            if (t >= d.times.back()) return d.values.back();
            const auto it = std::upper_bound(d.times.begin(), d.times.end(), t);
            const auto hi = static_cast<std::size_t>(it - d.times.begin());
            const std::size_t lo = hi - 1;
            const double w = (t - d.times[lo]) / (d.times[hi] - d.times[lo]);
            return (1.0 - w) * d.values[lo] + w * d.values[hi];
          },
      },
      spec);
}

bool is_active(const DisturbanceSpec& spec) { return !std::holds_alternative<NoDisturbance>(spec); }

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::symmetric_unit() {
  // 53 random bits -> [0, 1) -> [-1, 1).
  const double unit = static_cast<double>(next() >> 11) * 0x1.0p-53;
  return 2.0 * unit - 1.0;
}

const char* to_string(IntegratorMode mode) {
  return mode == IntegratorMode::zoh_exact ? "zoh_exact" : "dense_rk";
}

bool ScenarioConfig::perturbed() const { return is_active(disturbance) || noise.active(); }

double ScenarioConfig::effective_settle_epsilon() const {
  if (settle_epsilon) return *settle_epsilon;
  return perturbed() ? 1e-6 : 1e-9;
}

double ScenarioConfig::effective_snap_delta() const { return snap_delta ? *snap_delta : h / controller.T; }

void ScenarioConfig::validate() const {
  plant.validate();
  const Eigen::Index n = plant.state_dim();
  const Eigen::Index m = plant.input_dim();
  if (controller.K.rows() != m || controller.K.cols() != n || controller.K0.rows() != m ||
      controller.K0.cols() != n || controller.Gd.rows() != n || controller.X.rows() != n) {
    throw Error(ErrorKind::dimension, "scenario: controller dimensions do not match the plant");
  }
  if (x0.size() != n) throw Error(ErrorKind::dimension, "scenario: x0 has the wrong size");
  require_finite(x0, "scenario x0");
  if (x0_noise && x0_noise->size() != n) throw Error(ErrorKind::dimension, "scenario: x0 noise has the wrong size");
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorKind::config, "scenario: h must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw Error(ErrorKind::config, "scenario: t_end must be positive");
  if (noise.amplitude < 0.0 || !std::isfinite(noise.amplitude)) {
    throw Error(ErrorKind::config, "scenario: noise amplitude must be non-negative");
  }
  if (const auto* c = std::get_if<ConstantDisturbance>(&disturbance); c && c->value.size() != n) {
    throw Error(ErrorKind::dimension, "scenario: constant disturbance has the wrong size");
  }
  if (const auto* tab = std::get_if<TableDisturbance>(&disturbance)) {
    if (tab->times.size() != tab->values.size()) {
      throw Error(ErrorKind::config, "scenario: disturbance table times and values differ in length");
    }
    if (!std::is_sorted(tab->times.begin(), tab->times.end())) {
      throw Error(ErrorKind::config, "scenario: disturbance table times must be increasing");
    }
    for (const auto& v : tab->values) {
      if (v.size() != n) throw Error(ErrorKind::dimension, "scenario: disturbance table entry has the wrong size");
    }
  }
  const std::size_t horizon = delay_steps(plant.delay, h);
  if (!phi.empty()) {
    if (phi.size() != horizon) {
      throw Error(ErrorKind::config, "scenario: phi must have tau/h = " + std::to_string(horizon) + " samples");
    }
    for (const auto& v : phi) {
      if (v.size() != m) throw Error(ErrorKind::dimension, "scenario: phi sample has the wrong size");
    }
  }
  if (integrator == IntegratorMode::dense_rk && (horizon > 0 || noise.active())) {
    throw Error(ErrorKind::config, "scenario: dense integration supports delay-free, noise-free runs only");
  }
}

double SimulationTrace::max_norm() const { return max_norm_after(-std::numeric_limits<double>::infinity()); }

double SimulationTrace::max_norm_after(double from) const {
  double out = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] >= from) out = std::max(out, x[k].norm());
  }
  return out;
}

SimulationTrace simulate(const ScenarioConfig& raw_cfg) {
  if (raw_cfg.integrator == IntegratorMode::dense_rk) return simulate_dense(raw_cfg);
  const ScenarioConfig cfg = checked(raw_cfg);
  const LinearPlant& plant = cfg.plant;
  const Eigen::Index n = plant.state_dim();
  const Eigen::Index m = plant.input_dim();

  const PredictorTables tables = build_tables(plant, cfg.h);
  const std::size_t horizon = tables.horizon;
  const bool delayed = horizon > 0;
  const std::vector<Matrix> dist_weights = disturbance_weights(plant.A, cfg.h);
  const bool disturbed = is_active(cfg.disturbance);

  ControlHistory hist = cfg.phi.empty() ? ControlHistory::zeros(horizon, m) : ControlHistory::from_samples(cfg.phi);

  Vector x = cfg.x0;
  Vector reference = delayed ? predict(tables, x, hist) : x;
  if (cfg.x0_noise) reference += *cfg.x0_noise;
  const ControlContext ctx(cfg.controller, cfg.kind, reference);

  const auto steps = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.h));
  // A matched disturbance strictly inside the robustness bound still drives
  // the state to zero, where it stays. Its share kappa = sup|q2| / limit of
  // the bound perturbs the decay rate of the reading to within
  // [(1 - kappa)/T, (1 + kappa)/T]; snap once zero is reachable in one step.
  double rate = 1.0;
  bool snap_allowed = cfg.snap_enabled && !cfg.noise.active() && ctx.homogeneous();
  if (snap_allowed && disturbed) {
    const bool robust = cfg.kind == ControllerKind::prescribed_time_robust || cfg.kind == ControllerKind::fixed_time;
    const auto sup = matched_sup(cfg.disturbance, plant.B, ctx.dilation());
    const double limit = 2.0 * disturbance_bound(cfg.controller, ctx.reference_norm(), 2.0, cfg.kind);
    snap_allowed = robust && !delayed && sup && *sup < limit;
    if (snap_allowed) rate = 1.0 + *sup / limit;
  }
  const double snap_delta = cfg.effective_snap_delta() * rate;
  auto hold_control = [&](double t) {
    Vector w = Vector::Zero(m);
    for (int i = 0; i < kDisturbanceSubsteps; ++i) {
      const double ts = t + (i + 0.5) * cfg.h / kDisturbanceSubsteps;
      w += *matched_part(plant.B, disturbance_at(cfg.disturbance, plant.B, ts));
    }
    return Vector(-w / kDisturbanceSubsteps);
  };

  SimulationTrace trace;
  trace.state_dim = n;
  trace.input_dim = m;
  trace.settle_epsilon = cfg.effective_settle_epsilon();
  trace.t.reserve(steps + 1);

  SplitMix64 rng(cfg.noise.seed);
  bool snapped = false;
  bool clamped = false;
  std::optional<std::size_t> plant_snap_step;

  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * cfg.h;
    if (plant_snap_step && k == *plant_snap_step) {
      x.setZero();
      trace.events.push_back({t, "plant_snap", "plant state set to zero one delay after the predictor snap"});
    }
    trace.t.push_back(t);
    trace.x.push_back(x);

    Vector y;
    if (delayed) {
      y = snapped ? Vector(Vector::Zero(n)) : predict(tables, x, hist);
      trace.y.push_back(y);
    }

    Vector measured = delayed ? y : x;
    if (cfg.noise.active()) {
      for (Eigen::Index i = 0; i < n; ++i) measured(i) += cfg.noise.amplitude * rng.symmetric_unit();
    }

    Vector u;
    double reading = kNaN;
    bool snap_now = false;
    if (snapped) {
      // Filippov equivalent control keeping the origin invariant.
      u = disturbed && !delayed ? hold_control(t) : Vector(Vector::Zero(m));
      reading = 0.0;
    } else {
      const ControlEvaluation ev = ctx.evaluate(measured);
      u = ev.u;
      if (ev.reading) reading = *ev.reading;
      if (ev.clamped != clamped) {
        clamped = ev.clamped;
        trace.events.push_back({t, clamped ? "clamp_on" : "clamp_off", ""});
      }
      if (snap_allowed && ev.reading && reading <= snap_delta && k < steps) {
        // The continuous flow reaches the origin inside this sampling interval.
        snap_now = true;
      }
    }
    trace.u.push_back(u);
    trace.s.push_back(reading);
    if (k == steps) break;

    Vector next = tables.step_transition * x + tables.step_input * (delayed ? hist.oldest() : u);
    if (disturbed) {
      for (int i = 0; i < kDisturbanceSubsteps; ++i) {
        const double ts = t + (i + 0.5) * cfg.h / kDisturbanceSubsteps;
        next += dist_weights[static_cast<std::size_t>(i)] * disturbance_at(cfg.disturbance, plant.B, ts);
      }
    }
    if (delayed) hist.push(u);
    if (snapped && !delayed) next.setZero();
    x = std::move(next);

    if (snap_now) {
      snapped = true;
      const double t_next = static_cast<double>(k + 1) * cfg.h;
      if (delayed) {
        plant_snap_step = k + 1 + horizon;
        trace.events.push_back({t_next, "snap", "predictor state set to zero, reading " + std::to_string(reading)});
      } else {
        x.setZero();
        trace.events.push_back({t_next, "snap", "state set to zero, reading " + std::to_string(reading)});
      }
    }
  }

  trace.settling_time = measure_settling(trace, trace.settle_epsilon);
  return trace;
}

SimulationTrace simulate_dense(const ScenarioConfig& raw_cfg, double stop_reading, double tolerance) {
  ScenarioConfig cfg = checked(raw_cfg);
  if (delay_steps(cfg.plant.delay, cfg.h) > 0 || cfg.noise.active()) {
    throw Error(ErrorKind::config, "simulate_dense: delay-free, noise-free runs only");
  }
  const Eigen::Index n = cfg.plant.state_dim();
  const Eigen::Index m = cfg.plant.input_dim();
  Vector reference = cfg.x0;
  if (cfg.x0_noise) reference += *cfg.x0_noise;
  const ControlContext ctx(cfg.controller, cfg.kind, reference);
  const Matrix& A = cfg.plant.A;
  const Matrix& B = cfg.plant.B;

  using State = std::vector<double>;
  auto rhs = [&](const State& xs, State& dx, double t) {
    const Eigen::Map<const Vector> xv(xs.data(), n);
    Vector f = A * xv + B * ctx.eval_control(xv);
    if (is_active(cfg.disturbance)) f += disturbance_at(cfg.disturbance, B, t);
    Eigen::Map<Vector>(dx.data(), n) = f;
  };

  namespace odeint = boost::numeric::odeint;
  const double abs_tol = tolerance * std::max(cfg.x0.norm(), 1e-300);
  auto stepper = odeint::make_controlled(abs_tol, tolerance, odeint::runge_kutta_dopri5<State>());

  SimulationTrace trace;
  trace.state_dim = n;
  trace.input_dim = m;
  trace.settle_epsilon = cfg.effective_settle_epsilon();

  State xs(cfg.x0.data(), cfg.x0.data() + n);
  double t = 0.0;
  double dt = cfg.h * 0.1;
  auto record = [&]() {
    const Eigen::Map<const Vector> xv(xs.data(), n);
    const ControlEvaluation ev = ctx.evaluate(xv);
    trace.t.push_back(t);
    trace.x.emplace_back(xv);
    trace.u.push_back(ev.u);
    trace.s.push_back(ev.reading ? *ev.reading : kNaN);
    return ev.reading;
  };
  auto reading = record();
  int failures = 0;
  while (t < cfg.t_end) {
    if (reading && *reading < stop_reading) break;
    dt = std::min({dt, cfg.h, cfg.t_end - t});
    const auto result = stepper.try_step(rhs, xs, t, dt);
    if (result == odeint::fail) {
      if (++failures > 200) throw Error(ErrorKind::convergence, "simulate_dense: step size underflow");
      continue;
    }
    failures = 0;
    reading = record();
  }
  trace.settling_time = measure_settling(trace, trace.settle_epsilon);
  return trace;
}

std::optional<double> measure_settling(const SimulationTrace& trace, double epsilon) {
  std::optional<double> out;
  for (std::size_t k = trace.size(); k-- > 0;) {
    if (trace.x[k].norm() > epsilon) break;
    out = trace.t[k];
  }
  return out;
}

double disturbance_bound(const SynthesizedController& controller, double x0_norm, double rho,
                         ControllerKind kind) {
  if (!(rho > 1.0)) throw Error(ErrorKind::domain, "disturbance_bound: rho must exceed 1");
  if (!(x0_norm >= 0.0)) throw Error(ErrorKind::domain, "disturbance_bound: norm must be non-negative");
  const Matrix root = sqrtm_spd(controller.X);
  const Matrix root_inv = root.inverse();
  const Matrix sym = root_inv * controller.Gd * root + root * controller.Gd.transpose() * root_inv;
  const double lambda = min_eig_sym(sym);
  const double scale = kind == ControllerKind::fixed_time ? std::max(1.0, x0_norm) : x0_norm;
  return scale * lambda / (2.0 * rho * controller.T);
}

void write_trace_csv(std::ostream& os, const SimulationTrace& trace) {
  os << "t";
  for (Eigen::Index i = 1; i <= trace.state_dim; ++i) os << ",x" << i;
  for (Eigen::Index i = 1; i <= trace.input_dim; ++i) os << ",u" << i;
  os << ",s,settled";
  if (trace.has_predictor()) {
    for (Eigen::Index i = 1; i <= trace.state_dim; ++i) os << ",y" << i;
  }
  os << '\n';
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
  };
  for (std::size_t k = 0; k < trace.size(); ++k) {
    put(trace.t[k]);
    for (Eigen::Index i = 0; i < trace.state_dim; ++i) {
      os << ',';
      put(trace.x[k](i));
    }
    for (Eigen::Index i = 0; i < trace.input_dim; ++i) {
      os << ',';
      put(trace.u[k](i));
    }
    os << ',';
    put(trace.s[k]);
    os << ',' << (trace.settling_time && trace.t[k] >= *trace.settling_time ? 1 : 0);
    if (trace.has_predictor()) {
      for (Eigen::Index i = 0; i < trace.state_dim; ++i) {
        os << ',';
        put(trace.y[k](i));
      }
    }
    os << '\n';
  }
}

}  // namespace homctl
