#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "homctl/simulation.hpp"

namespace homctl {

/// Harmonic oscillator x1' = x2, x2' = -x1 + u.
LinearPlant harmonic_oscillator(double delay = 0.0);

/// Hand-tuned oscillator gains: K0 = (1 0), Gd = diag(2, 1), K = (-5.5 -3),
/// X = [1 -2; -2 5.5], T = 1.
SynthesizedController oscillator_reference_controller(double T = 1.0);

struct Expectation {
  enum class Kind { settle_window, no_settle, bounded };
  Kind kind = Kind::settle_window;
  double lo = 0.0;  // settle_window bounds
  double hi = 0.0;
  /// bounded: sup ||x|| <= max_norm and, when residual > 0, sup_{t >= T} ||x|| <= residual.
  double max_norm = 0.0;
  double residual = 0.0;

  std::string describe() const;
};

struct Preset {
  std::string name;
  std::string description;
  ScenarioConfig config;
  Expectation expect;
};

struct ScenarioOutcome {
  std::string name;
  std::optional<double> settling_time;
  double max_norm = 0.0;
  double residual = 0.0;
  bool passed = false;
  std::string expected;
  std::string error;
};

struct SuiteReport {
  std::string suite;
  std::vector<ScenarioOutcome> rows;

  bool all_passed() const;
  std::string table() const;
  std::string json() const;
};

std::vector<std::string> suite_names();
/// Throws a config error for unknown names.
std::vector<Preset> make_suite(const std::string& name, std::optional<std::uint64_t> seed = std::nullopt);

ScenarioOutcome judge(const Preset& preset, const SimulationTrace& trace);

/// Runs every preset, writes <name>.csv and <name>.json per scenario plus
/// report.txt and report.json into `out_dir`.
SuiteReport run_suite(const std::string& name, const std::filesystem::path& out_dir, unsigned workers = 1,
                      std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace homctl
