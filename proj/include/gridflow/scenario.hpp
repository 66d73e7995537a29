#pragma once

#include <string>
#include <vector>

#include "gridflow/engine.hpp"
#include "gridflow/grid.hpp"

namespace gridflow {

// Full experiment description; everything a run needs besides the seed-free
// code. Loaded from a JSON file, every field optional with the documented
// default.
struct ScenarioConfig {
  std::string scenario_id = "scenario";
  GridSpec grid;
  double lambda_mean_veh_per_h = 281.0;
  // Explicit per-source rates (veh/h). Empty = derive from the heavy-source
  // profile below, scaled so the mean equals lambda_mean_veh_per_h.
  std::vector<double> explicit_rates_veh_per_h;
  std::vector<std::string> heavy_sources = {"S1", "S4", "S8", "S11", "S15", "S18"};
  double heavy_factor = 2.0;
  // Empty = built-in frozen default matrix (see default_od_matrix).
  std::string od_matrix_file;
  double theta = 0.0;
  double tau_up_s = 180.0;
  int n_car = 10;
  double sim_duration_s = 7200.0;
  double measure_window_s = 4200.0;
  double dt_s = 1.0;
  MesoParams meso;
  RoutingMode mode = RoutingMode::Mixed;
  bool random_static_tiebreak = false;
  std::uint64_t seed = 1;

  // All validation problems at once; empty means runnable.
  std::vector<std::string> validate() const;

  // Per-source rates in S1.. order for the given graph.
  std::vector<double> source_rates(const RoadGraph& g) const;
  // OD rows in S1.. order (file if configured, else builtin).
  std::vector<std::vector<double>> od_rows(const RoadGraph& g) const;

  EngineConfig engine_config(const RoadGraph& g) const;

  static ScenarioConfig from_json_file(const std::string& path);
  static ScenarioConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

// The frozen non-uniform OD matrix: the published S1 row verbatim, the
// remaining rows drawn once from a fixed-seed generator that assigns zero
// probability to sinks on the source's own border side and normalizes
// uniform weights over the rest.
std::vector<std::vector<double>> default_od_matrix(const RoadGraph& g);

// CSV round-trip for OD matrices (header: source,D1..Dn; one row per source).
std::vector<std::vector<double>> load_od_matrix_csv(const std::string& path,
                                                    const RoadGraph& g);
void write_od_matrix_csv(const std::string& path, const RoadGraph& g,
                         const std::vector<std::vector<double>>& rows);

}  // namespace gridflow
