#include "homctl/scenario_file.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "homctl/errors.hpp"
#include "homctl/serialization.hpp"

namespace homctl {

namespace {

namespace pt = boost::property_tree;

std::string read_text(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, std::string("cannot open ") + what + " " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

pt::ptree parse_ini(const std::string& text) {
  std::istringstream in(text);
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::config, std::string("scenario parse error: ") + e.what());
  }
  return tree;
}

double parse_number(const std::string& text, const std::string& key) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw Error(ErrorKind::config, "bad number for " + key + ": '" + text + "'");
  }
  if (text.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v)) {
    throw Error(ErrorKind::config, "bad number for " + key + ": '" + text + "'");
  }
  return v;
}

std::optional<std::string> get(const pt::ptree& tree, const std::string& key) {
  if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'))) return *v;
  return std::nullopt;
}

std::string require(const pt::ptree& tree, const std::string& key) {
  auto v = get(tree, key);
  if (!v || v->empty()) throw Error(ErrorKind::config, "scenario: missing key " + key);
  return *v;
}

std::optional<double> get_number(const pt::ptree& tree, const std::string& key) {
  auto v = get(tree, key);
  if (!v || v->empty()) return std::nullopt;
  return parse_number(*v, key);
}

bool parse_bool(const std::string& text, const std::string& key) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw Error(ErrorKind::config, "bad boolean for " + key + ": '" + text + "'");
}

LinearPlant plant_from(const pt::ptree& tree, const std::filesystem::path& base_dir) {
  if (auto file = get(tree, "plant.file")) return load_plant_file(base_dir / *file);
  LinearPlant plant;
  plant.A = parse_matrix(require(tree, "plant.A"));
  plant.B = parse_matrix(require(tree, "plant.B"));
  plant.delay = get_number(tree, "plant.delay").value_or(0.0);
  plant.validate();
  return plant;
}

}  // namespace

Matrix parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream all(text);
  std::string row_text;
  while (std::getline(all, row_text, ';')) {
    for (char& c : row_text) {
      if (c == ',' || c == '\t') c = ' ';
    }
    std::istringstream row_in(row_text);
    std::vector<double> row;
    std::string token;
    while (row_in >> token) row.push_back(parse_number(token, "matrix entry"));
    if (row.empty()) {
      if (row_text.find_first_not_of(' ') == std::string::npos && !rows.empty()) continue;
      throw Error(ErrorKind::config, "matrix: empty row in '" + text + "'");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorKind::config, "matrix: ragged rows in '" + text + "'");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::config, "matrix: empty text");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

Vector parse_vector(const std::string& text) {
  const Matrix m = parse_matrix(text);
  if (m.rows() != 1 && m.cols() != 1) throw Error(ErrorKind::config, "expected a vector, got '" + text + "'");
  return m.rows() == 1 ? Vector(m.row(0).transpose()) : Vector(m.col(0));
}

LinearPlant parse_plant(const std::string& text) {
  const pt::ptree tree = parse_ini(text);
  LinearPlant plant;
  plant.A = parse_matrix(require(tree, "plant.A"));
  plant.B = parse_matrix(require(tree, "plant.B"));
  plant.delay = get_number(tree, "plant.delay").value_or(0.0);
  plant.validate();
  return plant;
}

LinearPlant load_plant_file(const std::filesystem::path& path) { return parse_plant(read_text(path, "plant file")); }

ScenarioFile parse_scenario(const std::string& text, const std::filesystem::path& base_dir, const std::string& name) {
  const pt::ptree tree = parse_ini(text);
  ScenarioFile out;
  out.name = name;
  ScenarioConfig& cfg = out.config;
  cfg.plant = plant_from(tree, base_dir);

  const std::string source = get(tree, "controller.source").value_or("file");
  if (source == "file") {
    cfg.controller = load_controller(base_dir / require(tree, "controller.file"));
  } else if (source == "gains") {
    cfg.controller = assemble_controller(cfg.plant, parse_matrix(require(tree, "controller.K0")),
                                         parse_matrix(require(tree, "controller.Gd")),
                                         parse_matrix(require(tree, "controller.K")),
                                         parse_matrix(require(tree, "controller.X")),
                                         parse_number(require(tree, "controller.T"), "controller.T"));
  } else if (source == "synthesize") {
    SynthesisConfig sc;
    sc.T = parse_number(require(tree, "controller.T"), "controller.T");
    cfg.controller = synthesize(cfg.plant, sc);
    out.synthesized = true;
  } else {
    throw Error(ErrorKind::config, "scenario: unknown controller source '" + source + "'");
  }
  if (auto kind = get(tree, "controller.kind")) {
    auto parsed = parse_controller_kind(*kind);
    if (!parsed) throw Error(ErrorKind::config, "scenario: unknown controller kind '" + *kind + "'");
    cfg.kind = *parsed;
  }

  cfg.x0 = parse_vector(require(tree, "sim.x0"));
  if (auto v = get(tree, "sim.x0_noise"); v && !v->empty()) cfg.x0_noise = parse_vector(*v);
  cfg.h = get_number(tree, "sim.h").value_or(cfg.h);
  cfg.t_end = get_number(tree, "sim.t_end").value_or(cfg.t_end);
  if (auto mode = get(tree, "sim.integrator")) {
    if (*mode == "zoh_exact") {
      cfg.integrator = IntegratorMode::zoh_exact;
    } else if (*mode == "dense_rk") {
      cfg.integrator = IntegratorMode::dense_rk;
    } else {
      throw Error(ErrorKind::config, "scenario: unknown integrator '" + *mode + "'");
    }
  }
  cfg.settle_epsilon = get_number(tree, "sim.settle_epsilon");
  cfg.snap_delta = get_number(tree, "sim.snap_delta");
  if (auto v = get(tree, "sim.snap")) cfg.snap_enabled = parse_bool(*v, "sim.snap");

  const std::string dist = get(tree, "perturbations.disturbance").value_or("none");
  if (dist == "none") {
    cfg.disturbance = NoDisturbance{};
  } else if (dist == "sinusoid") {
    MatchedSinusoid d;
    d.amplitude = get_number(tree, "perturbations.amplitude").value_or(d.amplitude);
    d.omega = get_number(tree, "perturbations.omega").value_or(d.omega);
    cfg.disturbance = d;
  } else if (dist == "constant") {
    cfg.disturbance = ConstantDisturbance{parse_vector(require(tree, "perturbations.vector"))};
  } else if (dist == "table") {
    TableDisturbance d;
    const Vector times = parse_vector(require(tree, "perturbations.table_times"));
    const Matrix values = parse_matrix(require(tree, "perturbations.table_values"));
    if (values.rows() != times.size()) {
      throw Error(ErrorKind::config, "scenario: table_values needs one row per table time");
    }
    for (Eigen::Index i = 0; i < times.size(); ++i) {
      d.times.push_back(times(i));
      d.values.emplace_back(values.row(i).transpose());
    }
    cfg.disturbance = std::move(d);
  } else {
    throw Error(ErrorKind::config, "scenario: unknown disturbance '" + dist + "'");
  }

  cfg.noise.amplitude = get_number(tree, "perturbations.noise_amplitude").value_or(0.0);
  if (auto seed = get(tree, "perturbations.seed"); seed && !seed->empty()) {
    try {
      cfg.noise.seed = std::stoull(*seed);
    } catch (const std::exception&) {
      throw Error(ErrorKind::config, "scenario: bad seed '" + *seed + "'");
    }
  } else if (cfg.noise.active()) {
    throw Error(ErrorKind::config, "scenario: noise requires a seed");
  }

  if (auto phi = get(tree, "perturbations.phi"); phi && !phi->empty() && *phi != "zero") {
    // One row per sample, row j holding phi(-j h).
    const Matrix table = parse_matrix(*phi);
    for (Eigen::Index j = 0; j < table.rows(); ++j) cfg.phi.emplace_back(table.row(j).transpose());
  }

  cfg.validate();
  return out;
}

ScenarioFile load_scenario_file(const std::filesystem::path& path) {
  return parse_scenario(read_text(path, "scenario file"), path.parent_path(), path.stem().string());
}

}  // namespace homctl
