#pragma once

#include <filesystem>
#include <string>

#include "homctl/simulation.hpp"
#include "homctl/synthesis.hpp"

namespace homctl {

/// JSON document with fields A, B, T, mu, G0, Y0, Gd, A0, X, Y, K0, K;
/// matrices are row-major nested arrays.
std::string controller_to_json(const SynthesizedController& controller);
SynthesizedController controller_from_json(const std::string& text);

SynthesizedController load_controller(const std::filesystem::path& path);
void save_controller(const std::filesystem::path& path, const SynthesizedController& controller);

std::string report_to_json(const VerificationReport& report);

/// Human-readable table, one check per line.
std::string format_report(const VerificationReport& report);

/// Settling time, norms and event log of a finished run.
std::string trace_summary_json(const SimulationTrace& trace, const std::string& scenario_name,
                               double prescribed_time);

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace homctl
