// homctl: synthesize, verify and simulate prescribed-time homogeneous controllers.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "homctl/errors.hpp"
#include "homctl/experiments.hpp"
#include "homctl/scenario_file.hpp"
#include "homctl/serialization.hpp"

namespace {

enum Exit : int { ok = 0, input = 2, infeasible = 3, verification = 4, runtime = 5 };

int exit_code(homctl::ErrorKind kind) {
  using homctl::ErrorKind;
  switch (kind) {
    case ErrorKind::dimension:
    case ErrorKind::domain:
    case ErrorKind::config:
      return input;
    case ErrorKind::infeasible:
      return infeasible;
    case ErrorKind::verification:
      return verification;
    default:
      return runtime;
  }
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("homctl");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("HOMCTL_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour exact names.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

int cmd_synth(const std::string& plant_path, double T, const std::string& out) {
  const homctl::LinearPlant plant = homctl::load_plant_file(plant_path);
  homctl::SynthesisConfig cfg;
  cfg.T = T;
  cfg.validate();
  spdlog::info("synthesizing for n = {}, m = {}, T = {}", plant.state_dim(), plant.input_dim(), T);
  homctl::SynthesizedController controller;
  try {
    controller = homctl::synthesize(plant, cfg);
  } catch (const homctl::Error& e) {
    if (e.kind() != homctl::ErrorKind::verification) throw;
    std::cerr << "synth: " << e.what() << '\n';
    return verification;
  }
  const homctl::VerificationReport report = homctl::verify(controller, plant);
  std::cout << homctl::format_report(report);
  if (!out.empty()) {
    homctl::save_controller(out, controller);
    spdlog::info("wrote {}", out);
  } else {
    std::cout << homctl::controller_to_json(controller);
  }
  return report.all_passed() ? ok : verification;
}

int cmd_verify(const std::string& controller_path, const std::string& plant_path) {
  const homctl::SynthesizedController controller = homctl::load_controller(controller_path);
  const homctl::LinearPlant plant = homctl::load_plant_file(plant_path);
  const homctl::VerificationReport report = homctl::verify(controller, plant);
  std::cout << homctl::format_report(report);
  return report.all_passed() ? ok : verification;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out, std::optional<std::uint64_t> seed) {
  homctl::ScenarioFile scenario = homctl::load_scenario_file(scenario_path);
  if (seed) scenario.config.noise.seed = *seed;
  const homctl::VerificationReport report = homctl::verify(scenario.config.controller, scenario.config.plant);
  if (!report.all_passed()) {
    std::cerr << homctl::format_report(report);
    return verification;
  }
  const homctl::SimulationTrace trace = homctl::simulate(scenario.config);
  std::ostringstream csv;
  homctl::write_trace_csv(csv, trace);
  const std::string summary = homctl::trace_summary_json(trace, scenario.name, scenario.config.controller.T);
  if (out.empty()) {
    std::cout << csv.str();
    std::cerr << summary;
    return ok;
  }
  std::filesystem::path csv_path(out);
  std::filesystem::path json_path = csv_path;
  json_path.replace_extension(".json");
  homctl::write_file_atomic(csv_path, csv.str());
  homctl::write_file_atomic(json_path, summary);
  std::cout << summary;
  return ok;
}

int cmd_experiment(const std::string& suite, const std::string& out, unsigned workers,
                   std::optional<std::uint64_t> seed) {
  const homctl::SuiteReport report = homctl::run_suite(suite, out, workers, seed);
  std::cout << report.table();
  for (const auto& row : report.rows) {
    if (!row.error.empty()) return runtime;
  }
  return report.all_passed() ? ok : verification;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Prescribed-time homogeneous control of linear plants"};
  app.require_subcommand(1);

  std::string plant_path, controller_path, scenario_path, out, suite;
  double T = 1.0;
  unsigned workers = 1;
  std::optional<std::uint64_t> seed;

  auto* synth = app.add_subcommand("synth", "synthesize a controller from a plant file");
  synth->add_option("--plant", plant_path, "plant file ([plant] section with A, B)")->required();
  synth->add_option("--T", T, "prescribed settling time");
  synth->add_option("--out", out, "controller JSON output path");

  auto* verify = app.add_subcommand("verify", "check a controller JSON against a plant");
  verify->add_option("--controller", controller_path, "controller JSON")->required();
  verify->add_option("--plant", plant_path, "plant file")->required();

  auto* simulate = app.add_subcommand("simulate", "run one scenario file");
  simulate->add_option("--scenario", scenario_path, "scenario file")->required();
  simulate->add_option("--out", out, "trace CSV path; the summary JSON is written next to it");
  simulate->add_option("--seed", seed, "override the noise seed");

  auto* experiment = app.add_subcommand("experiment", "run a canned experiment suite");
  experiment->add_option("--suite", suite, "suite name (paper, scaling)")->required();
  experiment->add_option("--out", out, "output directory")->required();
  experiment->add_option("--workers", workers, "parallel scenarios")->check(CLI::PositiveNumber);
  experiment->add_option("--seed", seed, "override the noise seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return input;
  }

  try {
    if (*synth) return cmd_synth(plant_path, T, out);
    if (*verify) return cmd_verify(controller_path, plant_path);
    if (*simulate) return cmd_simulate(scenario_path, out, seed);
    if (*experiment) return cmd_experiment(suite, out, workers, seed);
  } catch (const homctl::Error& e) {
    std::cerr << "error (" << homctl::to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return runtime;
  }
  return input;
}
