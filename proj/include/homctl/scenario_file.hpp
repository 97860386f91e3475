#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "homctl/simulation.hpp"

namespace homctl {

/// "0 1; -1 0" -> 2x2. Rows separated by ';', entries by spaces or commas.
Matrix parse_matrix(const std::string& text);
/// Accepts a single row or a single column.
Vector parse_vector(const std::string& text);

/// INI text with a [plant] section: A, B, optional delay.
LinearPlant parse_plant(const std::string& text);
LinearPlant load_plant_file(const std::filesystem::path& path);

struct ScenarioFile {
  std::string name;
  ScenarioConfig config;
  /// True when the controller came from [controller] source = synthesize.
  bool synthesized = false;
};

/// Sections [plant], [controller], [sim], [perturbations]. Relative paths
/// are resolved against `base_dir`.
ScenarioFile parse_scenario(const std::string& text, const std::filesystem::path& base_dir,
                            const std::string& name = "scenario");
ScenarioFile load_scenario_file(const std::filesystem::path& path);

}  // namespace homctl
