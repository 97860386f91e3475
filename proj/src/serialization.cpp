#include "homctl/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "homctl/errors.hpp"
#include "json.hpp"

namespace homctl {

namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from(const json& doc, const char* key) {
  if (!doc.contains(key)) throw Error(ErrorKind::config, std::string("controller JSON: missing field ") + key);
  const json& rows = doc.at(key);
  if (!rows.is_array() || rows.empty()) {
    throw Error(ErrorKind::config, std::string("controller JSON: ") + key + " must be a non-empty array of rows");
  }
  const std::size_t n_cols = rows.front().is_array() ? rows.front().size() : 0;
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != n_cols) {
      throw Error(ErrorKind::config, std::string("controller JSON: ragged rows in ") + key);
    }
    for (std::size_t j = 0; j < n_cols; ++j) {
      if (!rows[i][j].is_number()) {
        throw Error(ErrorKind::config, std::string("controller JSON: non-numeric entry in ") + key);
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
    }
  }
  return m;
}

double number_from(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_number()) {
    throw Error(ErrorKind::config, std::string("controller JSON: missing numeric field ") + key);
  }
  return doc.at(key).get<double>();
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string controller_to_json(const SynthesizedController& c) {
  json doc;
  doc["A"] = matrix_json(c.A);
  doc["B"] = matrix_json(c.B);
  doc["T"] = c.T;
  doc["mu"] = c.mu;
  doc["G0"] = matrix_json(c.G0);
  doc["Y0"] = matrix_json(c.Y0);
  doc["Gd"] = matrix_json(c.Gd);
  doc["A0"] = matrix_json(c.A0);
  doc["X"] = matrix_json(c.X);
  doc["Y"] = matrix_json(c.Y);
  doc["K0"] = matrix_json(c.K0);
  doc["K"] = matrix_json(c.K);
  return doc.dump(2) + "\n";
}

SynthesizedController controller_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, std::string("controller JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::config, "controller JSON: top level must be an object");
  SynthesizedController c;
  c.A = matrix_from(doc, "A");
  c.B = matrix_from(doc, "B");
  c.T = number_from(doc, "T");
  c.mu = number_from(doc, "mu");
  c.G0 = matrix_from(doc, "G0");
  c.Y0 = matrix_from(doc, "Y0");
  c.Gd = matrix_from(doc, "Gd");
  c.A0 = matrix_from(doc, "A0");
  c.X = matrix_from(doc, "X");
  c.Y = matrix_from(doc, "Y");
  c.K0 = matrix_from(doc, "K0");
  c.K = matrix_from(doc, "K");
  if (!(c.T > 0.0)) throw Error(ErrorKind::config, "controller JSON: T must be positive");
  return c;
}

SynthesizedController load_controller(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot open controller file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return controller_from_json(buf.str());
}

void save_controller(const std::filesystem::path& path, const SynthesizedController& controller) {
  write_file_atomic(path, controller_to_json(controller));
}

std::string report_to_json(const VerificationReport& report) {
  json doc;
  doc["passed"] = report.all_passed();
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"value", c.value},
                      {"threshold", c.threshold},
                      {"kind", c.is_margin ? "margin" : "residual"},
                      {"passed", c.passed}});
  }
  doc["checks"] = std::move(checks);
  return doc.dump(2) + "\n";
}

std::string format_report(const VerificationReport& report) {
  std::ostringstream os;
  char line[160];
  for (const auto& c : report.checks) {
    std::snprintf(line, sizeof(line), "%-30s %-8s %13.6e  %s %9.2e  %s\n", c.name.c_str(),
                  c.is_margin ? "margin" : "residual", c.value, c.is_margin ? ">" : "<=", c.threshold,
                  c.passed ? "ok" : "FAIL");
    os << line;
  }
  os << (report.all_passed() ? "all checks passed\n" : "verification FAILED: " + report.failures() + "\n");
  return os.str();
}

std::string trace_summary_json(const SimulationTrace& trace, const std::string& scenario_name,
                               double prescribed_time) {
  json doc;
  doc["scenario"] = scenario_name;
  doc["settling_time"] = nullable(trace.settling_time);
  doc["settle_epsilon"] = trace.settle_epsilon;
  doc["max_norm"] = trace.max_norm();
  doc["max_norm_after_T"] = trace.max_norm_after(prescribed_time);
  doc["samples"] = trace.size();
  doc["t_end"] = trace.t.empty() ? 0.0 : trace.t.back();
  json events = json::array();
  for (const auto& e : trace.events) events.push_back({{"t", e.t}, {"kind", e.kind}, {"detail", e.detail}});
  doc["events"] = std::move(events);
  return doc.dump(2) + "\n";
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::config, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorKind::config, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace homctl
