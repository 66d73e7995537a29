#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gridflow/engine.hpp"
#include "gridflow/scenario.hpp"

namespace gridflow {

// One line of the per-vehicle trace. Times are -1 until the event occurs.
struct TraceRecord {
  VehicleId vehicle_id = 0;
  InfoClass info_class = InfoClass::Uninformed;
  std::string source;  // "S3"
  std::string sink;    // "D17"
  double spawned_s = 0.0;
  double entered_s = -1.0;
  double completed_s = -1.0;
  int n_segments = 0;
  double distance_m = 0.0;

  bool completed() const { return completed_s >= 0.0; }
  double trip_time_s() const { return completed_s - spawned_s; }
};

struct SeriesPoint {
  double t_s = 0.0;
  double moving_avg_trip_time_s = 0.0;  // NaN when no completions in window
};

struct ResultRow {
  std::string scenario_id;
  double theta = 0.0;
  double lambda_mean = 0.0;
  double tau_up_s = 0.0;
  int n_car = 0;
  std::uint64_t seed = 0;
  std::uint64_t spawned = 0;
  std::uint64_t completed = 0;  // total over the whole run
  double tau_avg_all_s = std::numeric_limits<double>::quiet_NaN();
  double tau_avg_informed_s = std::numeric_limits<double>::quiet_NaN();
  double tau_avg_uninformed_s = std::numeric_limits<double>::quiet_NaN();
  double stability_slope_s_per_min = std::numeric_limits<double>::quiet_NaN();
  bool unstable_flag = false;  // no usable completions in the window
  std::string error;           // non-empty for failed sweep rows
};

std::vector<TraceRecord> extract_trace(const Engine& engine);

// FNV-1a over the formatted trace; equal hashes mean equal traces.
std::uint64_t trace_hash(const std::vector<TraceRecord>& trace);

struct MetricsOptions {
  double series_window_s = 300.0;
  double series_step_s = 60.0;
};

struct Metrics {
  ResultRow row;  // scenario identity fields left for the caller
  std::vector<SeriesPoint> series;
};

// tau_avg over completions inside the final measurement window, the sliding
// moving-average trip-time series over the whole run, and the least-squares
// slope of that series restricted to the measurement window.
Metrics compute_metrics(const std::vector<TraceRecord>& trace, const ScenarioConfig& cfg,
                        const MetricsOptions& opts = {});

}  // namespace gridflow
