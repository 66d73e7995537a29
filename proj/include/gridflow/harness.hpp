#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gridflow/metrics.hpp"
#include "gridflow/scenario.hpp"

namespace gridflow {

struct ScenarioResult {
  ResultRow row;
  std::vector<TraceRecord> trace;
  std::vector<SeriesPoint> series;
  std::uint64_t trace_hash = 0;
  InvariantCounters violations;
};

struct RunOptions {
  bool keep_trace = true;
  // Per-snapshot dump rows (epoch, edge name pair, cost) when set.
  std::function<void(const RoadGraph&, const WeightSnapshot&)> snapshot_sink;
};

// Builds the grid, runs the engine for cfg.sim_duration_s, computes metrics.
// Throws ConfigError listing all validation failures.
ScenarioResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

// One sweep point: overrides applied on top of the base config.
struct SweepPoint {
  std::string id;
  std::optional<double> theta;
  std::optional<double> lambda_mean_veh_per_h;
  std::optional<double> tau_up_s;
  std::optional<int> n_car;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> routing_mode;
};

struct SweepPlan {
  ScenarioConfig base;
  std::vector<SweepPoint> points;

  // Manifest JSON: {"base": {...} | "base_file": path,
  //                 "points": [{...overrides...}]} or cross-product lists
  // {"thetas": [...], "lambda_means": [...], "tau_ups": [...], "seeds": [...]}.
  static SweepPlan from_json_file(const std::string& path);
  static SweepPlan from_json_text(const std::string& text,
                                  const std::string& base_dir = ".");
};

struct SweepResult {
  std::vector<ResultRow> rows;  // plan order
  // series per row, same order (kept for chart emission)
  std::vector<std::vector<SeriesPoint>> series;
};

ScenarioConfig apply_point(const ScenarioConfig& base, const SweepPoint& p);

// Runs every point; a failed scenario becomes a row with empty metrics and
// the error message recorded. Row order follows the plan.
SweepResult run_sweep(const SweepPlan& plan);

enum class Regime { Low, High };

struct CalibrationOptions {
  int seeds = 10;                    // replications per probe
  double instability_threshold_s_per_min = 1.0;
  double resolution = 0.05;          // relative bisection resolution
  double lambda_lo = 281.0;          // bracket start (paper's low reference)
  double lambda_hi_cap = 4000.0;
  double low_regime_tolerance = 0.05;
  int min_unstable_seeds = 9;        // out of `seeds`, for the high predicate
};

struct CalibrationProbe {
  double lambda;
  bool predicate;
  std::string note;
};

struct CalibrationResult {
  double lambda = 0.0;
  std::vector<CalibrationProbe> probes;
};

// High: smallest mean lambda (within `resolution`) at which static-only runs
// are unstable (slope above threshold, or zero window completions) in at
// least min_unstable_seeds of `seeds` seeds. Low: largest probed lambda at
// which seed-averaged static vs all-dynamic tau_avg differ by less than
// low_regime_tolerance. Throws RoutingError-free diagnostics via ConfigError
// when the bracket cannot be established.
CalibrationResult calibrate_congestion(const ScenarioConfig& base, Regime regime,
                                       const CalibrationOptions& opts = {});

}  // namespace gridflow
