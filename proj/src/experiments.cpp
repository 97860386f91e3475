#include "homctl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "homctl/errors.hpp"
#include "homctl/serialization.hpp"
#include "json.hpp"

namespace homctl {

namespace {

constexpr double kStep = 0.01;
constexpr std::uint64_t kDefaultSeed = 20240501;

ScenarioConfig oscillator_scenario(double x1, double delay = 0.0) {
  ScenarioConfig cfg;
  cfg.plant = harmonic_oscillator(delay);
  cfg.controller = oscillator_reference_controller();
  cfg.kind = ControllerKind::prescribed_time_robust;
  cfg.x0 = make_vector({x1, 0.0});
  cfg.h = kStep;
  cfg.t_end = 3.0;
  return cfg;
}

Expectation window(double centre) {
  Expectation e;
  e.kind = Expectation::Kind::settle_window;
  e.lo = centre - 2 * kStep;
  e.hi = centre + 2 * kStep;
  return e;
}

Expectation bounded(double max_norm, double residual) {
  Expectation e;
  e.kind = Expectation::Kind::bounded;
  e.max_norm = max_norm;
  e.residual = residual;
  return e;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

LinearPlant harmonic_oscillator(double delay) {
  LinearPlant p;
  p.A = make_matrix({{0, 1}, {-1, 0}});
  p.B = make_matrix({{0}, {1}});
  p.delay = delay;
  return p;
}

SynthesizedController oscillator_reference_controller(double T) {
  return assemble_controller(harmonic_oscillator(), make_matrix({{1, 0}}), make_matrix({{2, 0}, {0, 1}}),
                             make_matrix({{-5.5, -3}}), make_matrix({{1, -2}, {-2, 5.5}}), T);
}

std::string Expectation::describe() const {
  switch (kind) {
    case Kind::settle_window:
      return "settle in [" + fmt(lo) + ", " + fmt(hi) + "]";
    case Kind::no_settle:
      return "no settling";
    case Kind::bounded:
      return "sup|x| <= " + fmt(max_norm) + (residual > 0.0 ? ", residual <= " + fmt(residual) : "");
  }
  return "";
}

std::vector<std::string> suite_names() { return {"paper", "scaling"}; }

std::vector<Preset> make_suite(const std::string& name, std::optional<std::uint64_t> seed) {
  std::vector<Preset> out;
  const std::uint64_t noise_seed = seed.value_or(kDefaultSeed);
  if (name == "paper") {
    for (double x1 : {0.2, 0.7}) {
      const std::string tag = x1 < 0.5 ? "0.2" : "0.7";
      out.push_back({"", "nominal, x0 = (" + tag + ", 0)", oscillator_scenario(x1), window(1.0)});
    }
    for (double x1 : {0.2, 0.7}) {
      const std::string tag = x1 < 0.5 ? "0.2" : "0.7";
      ScenarioConfig cfg = oscillator_scenario(x1);
      cfg.disturbance = MatchedSinusoid{1.0, 5.0};
      Expectation e;
      if (x1 < 0.5) {
        e.kind = Expectation::Kind::no_settle;
      } else {
        e = bounded(2.0 * x1, 0.0);
      }
      out.push_back({"", "matched disturbance B sin(5t), x0 = (" + tag + ", 0)", cfg, e});
    }
    for (double x1 : {0.2, 0.7}) {
      const std::string tag = x1 < 0.5 ? "0.2" : "0.7";
      ScenarioConfig cfg = oscillator_scenario(x1);
      cfg.noise = NoiseSpec{0.01, noise_seed};
      out.push_back({"", "measurement noise 0.01, x0 = (" + tag + ", 0)", cfg, bounded(2.0 * x1, 0.0)});
    }
    for (double x1 : {0.2, 0.7}) {
      const std::string tag = x1 < 0.5 ? "0.2" : "0.7";
      out.push_back({"", "input delay 0.5, x0 = (" + tag + ", 0)", oscillator_scenario(x1, 0.5), window(1.5)});
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i].name = "fig" + std::to_string(i + 1);
    return out;
  }
  if (name == "scaling") {
    for (int e = -2; e <= 5; ++e) {
      const double scale = std::pow(10.0, e);
      ScenarioConfig cfg = oscillator_scenario(scale);
      cfg.t_end = 1.5;
      char label[32];
      std::snprintf(label, sizeof(label), "scale_1e%+d", e);
      out.push_back({label, "nominal, x0 = (" + fmt(scale) + ", 0)", cfg, window(1.0)});
    }
    return out;
  }
  throw Error(ErrorKind::config, "unknown suite '" + name + "'");
}

ScenarioOutcome judge(const Preset& preset, const SimulationTrace& trace) {
  ScenarioOutcome o;
  o.name = preset.name;
  o.settling_time = trace.settling_time;
  o.max_norm = trace.max_norm();
  o.residual = trace.max_norm_after(preset.config.controller.T);
  o.expected = preset.expect.describe();
  const Expectation& e = preset.expect;
  switch (e.kind) {
    case Expectation::Kind::settle_window:
      o.passed = o.settling_time && *o.settling_time >= e.lo && *o.settling_time <= e.hi;
      break;
    case Expectation::Kind::no_settle:
      o.passed = !o.settling_time;
      break;
    case Expectation::Kind::bounded:
      o.passed = std::isfinite(o.max_norm) && o.max_norm <= e.max_norm && (e.residual <= 0.0 || o.residual <= e.residual);
      break;
  }
  return o;
}

bool SuiteReport::all_passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const ScenarioOutcome& r) { return r.passed; });
}

std::string SuiteReport::table() const {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof(line), "%-12s %-10s %-12s %-12s %-44s %s\n", "scenario", "settling", "max|x|",
                "residual", "expected", "result");
  os << line;
  for (const auto& r : rows) {
    const std::string settle = r.settling_time ? fmt(*r.settling_time) : "none";
    std::snprintf(line, sizeof(line), "%-12s %-10s %-12.4e %-12.4e %-44s %s\n", r.name.c_str(), settle.c_str(),
                  r.max_norm, r.residual, r.expected.c_str(), r.passed ? "PASS" : "FAIL");
    os << line;
    if (!r.error.empty()) os << "  error: " << r.error << '\n';
  }
  return os.str();
}

std::string SuiteReport::json() const {
  nlohmann::json doc;
  doc["suite"] = suite;
  doc["passed"] = all_passed();
  nlohmann::json items = nlohmann::json::array();
  for (const auto& r : rows) {
    items.push_back({{"scenario", r.name},
                     {"settling_time", r.settling_time ? nlohmann::json(*r.settling_time) : nlohmann::json(nullptr)},
                     {"max_norm", r.max_norm},
                     {"residual", r.residual},
                     {"expected", r.expected},
                     {"passed", r.passed},
                     {"error", r.error}});
  }
  doc["scenarios"] = std::move(items);
  return doc.dump(2) + "\n";
}

SuiteReport run_suite(const std::string& name, const std::filesystem::path& out_dir, unsigned workers,
                      std::optional<std::uint64_t> seed) {
  const std::vector<Preset> presets = make_suite(name, seed);
  std::filesystem::create_directories(out_dir);
  SuiteReport report;
  report.suite = name;
  report.rows.resize(presets.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < presets.size(); i = next++) {
      const Preset& p = presets[i];
      try {
        const SimulationTrace trace = simulate(p.config);
        std::ostringstream csv;
        write_trace_csv(csv, trace);
        write_file_atomic(out_dir / (p.name + ".csv"), csv.str());
        write_file_atomic(out_dir / (p.name + ".json"), trace_summary_json(trace, p.name, p.config.controller.T));
        report.rows[i] = judge(p, trace);
      } catch (const std::exception& e) {
        ScenarioOutcome o;
        o.name = p.name;
        o.expected = p.expect.describe();
        o.error = e.what();
        report.rows[i] = o;
      }
    }
  };
  const unsigned n_threads = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(presets.size()));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  write_file_atomic(out_dir / "report.txt", report.table());
  write_file_atomic(out_dir / "report.json", report.json());
  return report;
}

}  // namespace homctl
