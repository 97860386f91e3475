#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <random>

#include "homctl/errors.hpp"
#include "homctl/scenario_file.hpp"
#include "homctl/serialization.hpp"
#include "json.hpp"
#include "test_support.hpp"

using namespace homctl;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("homctl_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void expect_config_error(const std::function<void()>& fn) {
  try {
    fn();
    FAIL("no error raised");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
  }
}

const char* kScenario = R"(
[plant]
A = 0 1; -1 0
B = 0; 1

[controller]
source = gains
K0 = 1 0
Gd = 2 0; 0 1
K = -5.5 -3
X = 1 -2; -2 5.5
T = 1
kind = fixed_time

[sim]
x0 = 0.2, 0
h = 0.02
t_end = 1.5
snap = false

[perturbations]
disturbance = sinusoid
amplitude = 0.5
omega = 3
)";

}  // namespace

TEST_CASE("matrix and vector text") {
  CHECK((parse_matrix("0 1; -1 0") - make_matrix({{0, 1}, {-1, 0}})).norm() == 0.0);
  CHECK((parse_matrix("1,2;3,4") - make_matrix({{1, 2}, {3, 4}})).norm() == 0.0);
  CHECK(parse_matrix("  2.5e-3 ").size() == 1);
  CHECK((parse_vector("1 2 3") - make_vector({1, 2, 3})).norm() == 0.0);
  CHECK((parse_vector("1; 2; 3") - make_vector({1, 2, 3})).norm() == 0.0);
  expect_config_error([] { parse_matrix("1 2; 3"); });
  expect_config_error([] { parse_matrix("1 x"); });
  expect_config_error([] { parse_matrix(""); });
  expect_config_error([] { parse_vector("1 2; 3 4"); });
}

TEST_CASE("controller JSON round-trip") {
  const SynthesizedController c = synthesize(harmonic_oscillator(), SynthesisConfig{});
  const SynthesizedController back = controller_from_json(controller_to_json(c));
  CHECK((back.K - c.K).norm() <= 1e-15 * c.K.norm());
  CHECK((back.X - c.X).norm() <= 1e-15 * c.X.norm());
  CHECK((back.Gd - c.Gd).norm() == 0.0);
  CHECK(back.T == c.T);
  CHECK(verify(back, harmonic_oscillator()).all_passed());

  const fs::path file = scratch_dir() / "ctrl.json";
  save_controller(file, c);
  CHECK_FALSE(fs::exists(file.string() + ".tmp"));
  CHECK((load_controller(file).K0 - c.K0).norm() == 0.0);

  auto doc = nlohmann::json::parse(controller_to_json(c));
  doc.erase("X");
  expect_config_error([&] { controller_from_json(doc.dump()); });
  doc = nlohmann::json::parse(controller_to_json(c));
  doc["K"] = nlohmann::json::array({nlohmann::json::array({1}), nlohmann::json::array({1, 2})});
  expect_config_error([&] { controller_from_json(doc.dump()); });
  doc = nlohmann::json::parse(controller_to_json(c));
  doc["T"] = -1;
  expect_config_error([&] { controller_from_json(doc.dump()); });
  expect_config_error([] { controller_from_json("{not json"); });
  expect_config_error([] { load_controller(scratch_dir() / "missing.json"); });
}

TEST_CASE("report formats") {
  const VerificationReport good = verify(oscillator_reference_controller(), harmonic_oscillator());
  const std::string text = format_report(good);
  CHECK(text.find("all checks passed") != std::string::npos);
  CHECK(text.find("x_positive_definite") != std::string::npos);
  const auto doc = nlohmann::json::parse(report_to_json(good));
  CHECK(doc["passed"].get<bool>());

  SynthesizedController bad = oscillator_reference_controller();
  bad.X = make_matrix({{1, 2}, {2, 1}});
  const std::string bad_text = format_report(verify(bad, harmonic_oscillator()));
  CHECK(bad_text.find("verification FAILED") != std::string::npos);
}

TEST_CASE("trace summary") {
  ScenarioConfig cfg;
  cfg.plant = harmonic_oscillator();
  cfg.controller = oscillator_reference_controller();
  cfg.x0 = make_vector({0.2, 0});
  cfg.t_end = 1.5;
  const SimulationTrace tr = simulate(cfg);
  const auto doc = nlohmann::json::parse(trace_summary_json(tr, "nominal", 1.02));
  CHECK(doc["scenario"] == "nominal");
  CHECK(doc["settling_time"].get<double>() == doctest::Approx(*tr.settling_time));
  CHECK(doc["max_norm_after_T"].get<double>() == 0.0);
  CHECK(doc["samples"].get<std::size_t>() == tr.size());
  CHECK(doc["events"].is_array());

  cfg.kind = ControllerKind::linear;
  const auto lin = nlohmann::json::parse(trace_summary_json(simulate(cfg), "lin", 1.0));
  CHECK(lin["settling_time"].is_null());
}

TEST_CASE("plant files") {
  const LinearPlant p = parse_plant("[plant]\nA = 0 1; -1 0\nB = 0; 1\ndelay = 0.5\n");
  CHECK(p.delay == 0.5);
  CHECK((p.A - harmonic_oscillator().A).norm() == 0.0);
  expect_config_error([] { parse_plant("[plant]\nB = 0; 1\n"); });
  expect_config_error([] { parse_plant("[plant\nA = 1\n"); });
  CHECK_THROWS_AS(parse_plant("[plant]\nA = 0 1; -1 0\nB = 0; 1; 1\n"), Error);
}

TEST_CASE("scenario text") {
  const ScenarioFile sf = parse_scenario(kScenario, scratch_dir(), "demo");
  const ScenarioConfig& cfg = sf.config;
  CHECK(sf.name == "demo");
  CHECK_FALSE(sf.synthesized);
  CHECK(cfg.kind == ControllerKind::fixed_time);
  CHECK(cfg.h == 0.02);
  CHECK(cfg.t_end == 1.5);
  CHECK_FALSE(cfg.snap_enabled);
  REQUIRE(std::holds_alternative<MatchedSinusoid>(cfg.disturbance));
  CHECK(std::get<MatchedSinusoid>(cfg.disturbance).amplitude == 0.5);
  CHECK(std::get<MatchedSinusoid>(cfg.disturbance).omega == 3.0);
  CHECK((cfg.controller.K - make_matrix({{-5.5, -3}})).norm() == 0.0);

  std::string noisy = kScenario;
  noisy += "noise_amplitude = 0.01\n";
  expect_config_error([&] { parse_scenario(noisy, scratch_dir()); });
  const ScenarioFile seeded = parse_scenario(noisy + "seed = 7\n", scratch_dir());
  CHECK(seeded.config.noise.seed == 7);

  std::string table = kScenario;
  table.replace(table.find("disturbance = sinusoid"), 22, "disturbance = table");
  table += "table_times = 0 1\ntable_values = 0 0; 0 1\n";
  const ScenarioFile tab = parse_scenario(table, scratch_dir());
  REQUIRE(std::holds_alternative<TableDisturbance>(tab.config.disturbance));
  CHECK(std::get<TableDisturbance>(tab.config.disturbance).values.size() == 2);

  std::string unknown = kScenario;
  unknown.replace(unknown.find("kind = fixed_time"), 17, "kind = magic");
  expect_config_error([&] { parse_scenario(unknown, scratch_dir()); });
}

TEST_CASE("scenario with a controller file and a delay table") {
  save_controller(scratch_dir() / "c.json", oscillator_reference_controller());
  std::string text =
      "[plant]\nA = 0 1; -1 0\nB = 0; 1\ndelay = 0.03\n"
      "[controller]\nsource = file\nfile = c.json\n"
      "[sim]\nx0 = 0.2 0\nh = 0.01\n"
      "[perturbations]\nphi = 0.1; 0.2; 0.3\n";
  const ScenarioFile sf = parse_scenario(text, scratch_dir());
  REQUIRE(sf.config.phi.size() == 3);
  CHECK(sf.config.phi[1](0) == 0.2);
  text.replace(text.find("0.1; 0.2; 0.3"), 13, "0.1; 0.2");
  expect_config_error([&] { parse_scenario(text, scratch_dir()); });
}

TEST_CASE("synthesize source") {
  const ScenarioFile sf = parse_scenario(
      "[plant]\nA = 0 1; 0 0\nB = 0; 1\n[controller]\nsource = synthesize\nT = 2\n[sim]\nx0 = 1 0\n", ".");
  CHECK(sf.synthesized);
  CHECK(sf.config.controller.T == 2.0);
}

TEST_CASE("bundled scenario files load and match their presets") {
  const fs::path dir = fs::path(HOMCTL_REPO_DATA) / "scenarios";
  int count = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".ini") continue;
    const ScenarioFile sf = load_scenario_file(entry.path());
    CHECK(verify(sf.config.controller, sf.config.plant).all_passed());
    CHECK(sf.name == entry.path().stem().string());
    ++count;
  }
  CHECK(count == 8);
  CHECK(load_plant_file(fs::path(HOMCTL_REPO_DATA) / "oscillator_delay.plant").delay == 0.5);
}

TEST_CASE("atomic writes replace the target") {
  const fs::path file = scratch_dir() / "out.txt";
  write_file_atomic(file, "first");
  write_file_atomic(file, "second\n");
  CHECK(read(file) == "second\n");
  CHECK_FALSE(fs::exists(file.string() + ".tmp"));
}
