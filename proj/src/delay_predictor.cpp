#include "homctl/delay_predictor.hpp"

#include <cmath>
#include <string>

#include "homctl/errors.hpp"

namespace homctl {

std::size_t delay_steps(double delay, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw Error(ErrorKind::config, "sampling period must be positive");
  if (!(delay >= 0.0) || !std::isfinite(delay)) throw Error(ErrorKind::config, "delay must be non-negative");
  const double ratio = delay / step;
  const double whole = std::round(ratio);
  if (std::abs(ratio - whole) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(ErrorKind::config, "delay " + std::to_string(delay) +
                                       " is not an integer multiple of the sampling period " +
                                       std::to_string(step));
  }
  return static_cast<std::size_t>(whole);
}

PredictorTables build_tables(const LinearPlant& plant, double step) {
  plant.validate();
  PredictorTables t;
  t.step = step;
  t.delay = plant.delay;
  t.horizon = delay_steps(plant.delay, step);
  const Eigen::Index n = plant.state_dim();
  t.step_transition = expm(step * plant.A);
  t.step_input = zoh_integral(plant.A, plant.B, step);
  t.kernels.reserve(t.horizon);
  Matrix power = Matrix::Identity(n, n);
  for (std::size_t j = 1; j <= t.horizon; ++j) {
    t.kernels.push_back(power * t.step_input);
    power = power * t.step_transition;
  }
  // power == e^{N h A}; recomputed directly for accuracy.
  t.transition = t.horizon == 0 ? Matrix(Matrix::Identity(n, n)) : expm(plant.delay * plant.A);
  t.inverse_transition = t.horizon == 0 ? Matrix(Matrix::Identity(n, n)) : expm(-plant.delay * plant.A);
  return t;
}

ControlHistory::ControlHistory(std::size_t horizon, Eigen::Index input_dim)
    : buffer_(horizon, Vector::Zero(input_dim)), input_dim_(input_dim) {}

ControlHistory ControlHistory::zeros(std::size_t horizon, Eigen::Index input_dim) {
  ControlHistory h(horizon, input_dim);
  h.count_ = horizon;
  return h;
}

ControlHistory ControlHistory::from_samples(const std::vector<Vector>& samples) {
  if (samples.empty()) return ControlHistory(0, 0);
  const Eigen::Index m = samples.front().size();
  ControlHistory h(samples.size(), m);
  // Push oldest first so that samples[j - 1] ends up at(j).
  for (auto it = samples.rbegin(); it != samples.rend(); ++it) {
    if (it->size() != m) throw Error(ErrorKind::dimension, "ControlHistory: ragged initial segment");
    h.push(*it);
  }
  return h;
}

void ControlHistory::push(const Vector& u) {
  if (u.size() != input_dim_) throw Error(ErrorKind::dimension, "ControlHistory: control has the wrong size");
  if (!u.allFinite()) throw Error(ErrorKind::domain, "ControlHistory: non-finite control");
  if (buffer_.empty()) return;
  head_ = (head_ + buffer_.size() - 1) % buffer_.size();
  buffer_[head_] = u;
  if (count_ < buffer_.size()) ++count_;
}

const Vector& ControlHistory::at(std::size_t j) const {
  if (j == 0 || j > buffer_.size()) throw Error(ErrorKind::domain, "ControlHistory: lag out of range");
  if (!filled()) throw Error(ErrorKind::state, "ControlHistory: history not filled");
  return buffer_[(head_ + j - 1) % buffer_.size()];
}

Vector history_integral(const PredictorTables& tables, const ControlHistory& hist) {
  if (hist.horizon() != tables.horizon) {
    throw Error(ErrorKind::dimension, "predictor: history length does not match the tables");
  }
  Vector acc = Vector::Zero(tables.state_dim());
  if (tables.horizon == 0) return acc;
  if (!hist.filled()) throw Error(ErrorKind::state, "predictor: history not filled");
  if (hist.input_dim() != tables.input_dim()) {
    throw Error(ErrorKind::dimension, "predictor: history input size does not match the plant");
  }
  for (std::size_t j = 1; j <= tables.horizon; ++j) acc += tables.kernels[j - 1] * hist.at(j);
  return acc;
}

Vector predict(const PredictorTables& tables, const Vector& x, const ControlHistory& hist) {
  if (x.size() != tables.state_dim()) throw Error(ErrorKind::dimension, "predict: state has the wrong size");
  if (tables.horizon == 0) return x;
  return tables.transition * x + history_integral(tables, hist);
}

Vector invert(const PredictorTables& tables, const Vector& y, const ControlHistory& hist) {
  if (y.size() != tables.state_dim()) throw Error(ErrorKind::dimension, "invert: state has the wrong size");
  if (tables.horizon == 0) return y;
  return tables.inverse_transition * (y - history_integral(tables, hist));
}

}  // namespace homctl
