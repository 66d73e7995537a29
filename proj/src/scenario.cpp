#include "gridflow/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gridflow {

namespace {

using nlohmann::json;

int parse_source_label(const std::string& label, std::size_t n_sources) {
  if (label.size() < 2 || label[0] != 'S')
    throw ConfigError("bad source label '" + label + "'");
  int idx = std::stoi(label.substr(1)) - 1;
  if (idx < 0 || static_cast<std::size_t>(idx) >= n_sources)
    throw ConfigError("source label '" + label + "' out of range for this grid");
  return idx;
}

}  // namespace

std::vector<std::string> ScenarioConfig::validate() const {
  std::vector<std::string> errors;
  try {
    grid.validate();
  } catch (const ConfigError& e) {
    errors.push_back(e.what());
  }
  if (theta < 0.0 || theta > 1.0) errors.push_back("theta must be in [0,1]");
  if (dt_s <= 0.0) errors.push_back("dt_s must be > 0");
  if (tau_up_s <= 0.0) errors.push_back("tau_up_s must be > 0");
  if (dt_s > 0.0 && tau_up_s > 0.0) {
    double ticks = tau_up_s / dt_s;
    if (std::abs(ticks - std::round(ticks)) > 1e-9)
      errors.push_back("tau_up_s must be a multiple of dt_s");
  }
  if (sim_duration_s <= 0.0) errors.push_back("sim_duration_s must be > 0");
  if (measure_window_s <= 0.0 || measure_window_s > sim_duration_s)
    errors.push_back("measure_window_s must be in (0, sim_duration_s]");
  if (mode == RoutingMode::Mixed && tau_up_s > sim_duration_s - measure_window_s &&
      measure_window_s < sim_duration_s)
    errors.push_back("tau_up_s must allow at least one publication before the "
                     "measurement window starts");
  if (n_car < 1) errors.push_back("n_car must be >= 1");
  if (lambda_mean_veh_per_h < 0.0) errors.push_back("lambda_mean_veh_per_h must be >= 0");
  if (heavy_factor <= 0.0) errors.push_back("heavy_factor must be > 0");
  for (double r : explicit_rates_veh_per_h)
    if (r < 0.0) errors.push_back("explicit rates must be >= 0");
  if (meso.saturation_flow_veh_per_s_per_lane <= 0.0)
    errors.push_back("saturation flow must be > 0");
  if (meso.vehicle_length_m <= 0.0) errors.push_back("vehicle_length_m must be > 0");
  if (meso.min_green_s <= 0.0 || meso.max_green_s < meso.min_green_s)
    errors.push_back("signal green bounds require 0 < min_green_s <= max_green_s");
  return errors;
}

std::vector<double> ScenarioConfig::source_rates(const RoadGraph& g) const {
  const std::size_t n = g.sources.size();
  if (!explicit_rates_veh_per_h.empty()) {
    if (explicit_rates_veh_per_h.size() != n)
      throw ConfigError("explicit rate vector has " +
                        std::to_string(explicit_rates_veh_per_h.size()) +
                        " entries, grid has " + std::to_string(n) + " sources");
    return explicit_rates_veh_per_h;
  }
  std::vector<char> heavy(n, 0);
  for (const std::string& label : heavy_sources)
    heavy[parse_source_label(label, n)] = 1;
  std::size_t nh = 0;
  for (char h : heavy) nh += h;
  double base = lambda_mean_veh_per_h * n / (nh * heavy_factor + (n - nh));
  std::vector<double> rates(n);
  for (std::size_t i = 0; i < n; ++i) rates[i] = heavy[i] ? heavy_factor * base : base;
  return rates;
}

std::vector<std::vector<double>> default_od_matrix(const RoadGraph& g) {
  const std::size_t n_src = g.sources.size();
  const std::size_t n_snk = g.sinks.size();
  std::vector<std::vector<double>> rows(n_src, std::vector<double>(n_snk, 0.0));

  for (std::size_t i = 0; i < n_src; ++i) {
    BorderSide side = g.segments[g.sources[i]].border;
    RngStream rng(0x0dda7ab1eULL, i);
    double sum = 0.0;
    for (std::size_t j = 0; j < n_snk; ++j) {
      if (g.segments[g.sinks[j]].border == side) continue;
      rows[i][j] = rng.uniform();
      sum += rows[i][j];
    }
    for (double& w : rows[i]) w /= sum;
  }

  if (n_snk == 20) {
    // The published S1 row, verbatim.
    auto& row = rows[0];
    std::fill(row.begin(), row.end(), 0.0);
    row[4] = 0.15;   // D5
    row[7] = 0.20;   // D8
    row[9] = 0.10;   // D10
    row[11] = 0.10;  // D12
    row[13] = 0.10;  // D14
    row[14] = 0.15;  // D15
    row[16] = 0.10;  // D17
    row[17] = 0.10;  // D18
  }
  return rows;
}

std::vector<std::vector<double>> ScenarioConfig::od_rows(const RoadGraph& g) const {
  if (od_matrix_file.empty()) return default_od_matrix(g);
  return load_od_matrix_csv(od_matrix_file, g);
}

EngineConfig ScenarioConfig::engine_config(const RoadGraph& g) const {
  EngineConfig ec;
  ec.theta = theta;
  ec.tau_up_s = tau_up_s;
  ec.n_car = n_car;
  ec.dt_s = dt_s;
  ec.mode = mode;
  ec.random_static_tiebreak = random_static_tiebreak;
  ec.seed = seed;
  ec.source_rates_veh_per_h = source_rates(g);
  ec.od_rows = od_rows(g);
  ec.meso = meso;
  return ec;
}

std::vector<std::vector<double>> load_od_matrix_csv(const std::string& path,
                                                    const RoadGraph& g) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open OD matrix file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty OD matrix file: " + path);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');  // source label, positional
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != g.sinks.size())
      throw ConfigError("OD matrix row has " + std::to_string(row.size()) +
                        " entries, grid has " + std::to_string(g.sinks.size()) + " sinks");
    rows.push_back(std::move(row));
  }
  if (rows.size() != g.sources.size())
    throw ConfigError("OD matrix has " + std::to_string(rows.size()) +
                      " rows, grid has " + std::to_string(g.sources.size()) + " sources");
  return rows;
}

void write_od_matrix_csv(const std::string& path, const RoadGraph& g,
                         const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write OD matrix file: " + path);
  out << "source";
  for (std::size_t j = 0; j < g.sinks.size(); ++j) out << ",D" << j + 1;
  out << "\n";
  char buf[40];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << "S" << i + 1;
    for (double w : rows[i]) {
      std::snprintf(buf, sizeof buf, ",%.17g", w);
      out << buf;
    }
    out << "\n";
  }
}

namespace {

RoutingMode mode_from_string(const std::string& s) {
  if (s == "mixed") return RoutingMode::Mixed;
  if (s == "static_only") return RoutingMode::StaticOnly;
  throw ConfigError("routing_mode must be 'mixed' or 'static_only', got '" + s + "'");
}

const char* mode_to_string(RoutingMode m) {
  return m == RoutingMode::Mixed ? "mixed" : "static_only";
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ScenarioConfig c;
  c.scenario_id = j.value("scenario_id", c.scenario_id);
  if (j.contains("grid")) {
    const json& gj = j["grid"];
    c.grid.rows = gj.value("rows", c.grid.rows);
    c.grid.cols = gj.value("cols", c.grid.cols);
    c.grid.lanes_per_direction = gj.value("lanes_per_direction", c.grid.lanes_per_direction);
    c.grid.span_m = gj.value("span_m", c.grid.span_m);
    c.grid.highway_margin_m = gj.value("highway_margin_m", c.grid.highway_margin_m);
    c.grid.free_flow_speed_mps = gj.value("free_flow_speed_mps", c.grid.free_flow_speed_mps);
  }
  c.lambda_mean_veh_per_h = j.value("lambda_mean_veh_per_h", c.lambda_mean_veh_per_h);
  if (j.contains("lambda_profile")) {
    const json& pj = j["lambda_profile"];
    if (pj.contains("rates"))
      c.explicit_rates_veh_per_h = pj["rates"].get<std::vector<double>>();
    if (pj.contains("heavy_sources"))
      c.heavy_sources = pj["heavy_sources"].get<std::vector<std::string>>();
    c.heavy_factor = pj.value("heavy_factor", c.heavy_factor);
  }
  c.od_matrix_file = j.value("od_matrix_file", c.od_matrix_file);
  c.theta = j.value("theta", c.theta);
  c.tau_up_s = j.value("tau_up_s", c.tau_up_s);
  c.n_car = j.value("n_car", c.n_car);
  c.sim_duration_s = j.value("sim_duration_s", c.sim_duration_s);
  c.measure_window_s = j.value("measure_window_s", c.measure_window_s);
  c.dt_s = j.value("dt_s", c.dt_s);
  if (j.contains("mesoscopic")) {
    const json& mj = j["mesoscopic"];
    c.meso.saturation_flow_veh_per_s_per_lane =
        mj.value("saturation_flow_veh_per_s_per_lane",
                 c.meso.saturation_flow_veh_per_s_per_lane);
    c.meso.vehicle_length_m = mj.value("vehicle_length_m", c.meso.vehicle_length_m);
    c.meso.min_green_s = mj.value("min_green_s", c.meso.min_green_s);
    c.meso.max_green_s = mj.value("max_green_s", c.meso.max_green_s);
  }
  c.mode = mode_from_string(j.value("routing_mode", std::string("mixed")));
  c.random_static_tiebreak = j.value("random_static_tiebreak", c.random_static_tiebreak);
  c.seed = j.value("seed", c.seed);
  return c;
}

ScenarioConfig ScenarioConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string ScenarioConfig::to_json_text() const {
  json j;
  j["scenario_id"] = scenario_id;
  j["grid"] = {{"rows", grid.rows},
               {"cols", grid.cols},
               {"lanes_per_direction", grid.lanes_per_direction},
               {"span_m", grid.span_m},
               {"highway_margin_m", grid.highway_margin_m},
               {"free_flow_speed_mps", grid.free_flow_speed_mps}};
  j["lambda_mean_veh_per_h"] = lambda_mean_veh_per_h;
  json prof;
  if (!explicit_rates_veh_per_h.empty()) prof["rates"] = explicit_rates_veh_per_h;
  prof["heavy_sources"] = heavy_sources;
  prof["heavy_factor"] = heavy_factor;
  j["lambda_profile"] = prof;
  j["od_matrix_file"] = od_matrix_file;
  j["theta"] = theta;
  j["tau_up_s"] = tau_up_s;
  j["n_car"] = n_car;
  j["sim_duration_s"] = sim_duration_s;
  j["measure_window_s"] = measure_window_s;
  j["dt_s"] = dt_s;
  j["mesoscopic"] = {{"saturation_flow_veh_per_s_per_lane",
                      meso.saturation_flow_veh_per_s_per_lane},
                     {"vehicle_length_m", meso.vehicle_length_m},
                     {"min_green_s", meso.min_green_s},
                     {"max_green_s", meso.max_green_s}};
  j["routing_mode"] = mode_to_string(mode);
  j["random_static_tiebreak"] = random_static_tiebreak;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

}  // namespace gridflow
