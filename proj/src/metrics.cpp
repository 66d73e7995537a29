#include "gridflow/metrics.hpp"

#include <algorithm>
#include <cstdio>

namespace gridflow {

std::vector<TraceRecord> extract_trace(const Engine& engine) {
  const RoadGraph& g = engine.graph();
  std::vector<TraceRecord> trace;
  trace.reserve(engine.vehicles().size());
  for (const Vehicle& v : engine.vehicles()) {
    TraceRecord r;
    r.vehicle_id = v.id;
    r.info_class = v.info_class;
    r.source = g.source_label(v.source);
    r.sink = g.sink_label(v.destination);
    r.spawned_s = v.spawned_at_s;
    r.entered_s = v.entered_at_s;
    r.completed_s = v.completed_at_s;
    r.n_segments = v.n_segments;
    r.distance_m = v.distance_m;
    trace.push_back(std::move(r));
  }
  return trace;
}

std::uint64_t trace_hash(const std::vector<TraceRecord>& trace) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  char buf[192];
  for (const TraceRecord& r : trace) {
    int len = std::snprintf(buf, sizeof buf, "%u|%d|%s|%s|%.6f|%.6f|%.6f|%d|%.6f\n",
                            r.vehicle_id, static_cast<int>(r.info_class), r.source.c_str(),
                            r.sink.c_str(), r.spawned_s, r.entered_s, r.completed_s,
                            r.n_segments, r.distance_m);
    mix(buf, static_cast<std::size_t>(len));
  }
  return h;
}

Metrics compute_metrics(const std::vector<TraceRecord>& trace, const ScenarioConfig& cfg,
                        const MetricsOptions& opts) {
  Metrics m;
  const double window_start = cfg.sim_duration_s - cfg.measure_window_s;
  const double window_end = cfg.sim_duration_s;

  double sum_all = 0.0, sum_inf = 0.0, sum_uni = 0.0;
  std::uint64_t n_all = 0, n_inf = 0, n_uni = 0;
  for (const TraceRecord& r : trace) {
    if (!r.completed()) continue;
    if (r.completed_s < window_start || r.completed_s > window_end) continue;
    double tt = r.trip_time_s();
    sum_all += tt;
    ++n_all;
    if (r.info_class == InfoClass::Informed) {
      sum_inf += tt;
      ++n_inf;
    } else {
      sum_uni += tt;
      ++n_uni;
    }
  }
  if (n_all > 0) m.row.tau_avg_all_s = sum_all / n_all;
  if (n_inf > 0) m.row.tau_avg_informed_s = sum_inf / n_inf;
  if (n_uni > 0) m.row.tau_avg_uninformed_s = sum_uni / n_uni;

  // Sliding moving-average trip-time series over completion events,
  // sampled on a fixed clock so re-emission is reproducible.
  std::vector<std::pair<double, double>> completions;  // (completed_s, trip time)
  for (const TraceRecord& r : trace)
    if (r.completed()) completions.emplace_back(r.completed_s, r.trip_time_s());
  std::sort(completions.begin(), completions.end());

  for (double t = opts.series_window_s; t <= cfg.sim_duration_s + 1e-9;
       t += opts.series_step_s) {
    auto lo = std::lower_bound(completions.begin(), completions.end(),
                               std::make_pair(t - opts.series_window_s,
                                              -std::numeric_limits<double>::infinity()));
    auto hi = std::upper_bound(completions.begin(), completions.end(),
                               std::make_pair(t, std::numeric_limits<double>::infinity()));
    double sum = 0.0;
    std::size_t n = 0;
    for (auto it = lo; it != hi; ++it) {
      if (it->first <= t - opts.series_window_s) continue;  // window is (t-w, t]
      sum += it->second;
      ++n;
    }
    SeriesPoint p;
    p.t_s = t;
    p.moving_avg_trip_time_s =
        n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
    m.series.push_back(p);
  }

  // Least-squares trend of the series inside the measurement window, s/min.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (const SeriesPoint& p : m.series) {
    if (p.t_s < window_start || p.t_s > window_end) continue;
    if (std::isnan(p.moving_avg_trip_time_s)) continue;
    double x = p.t_s / 60.0;  // minutes
    sx += x;
    sy += p.moving_avg_trip_time_s;
    sxx += x * x;
    sxy += x * p.moving_avg_trip_time_s;
    ++n;
  }
  if (n >= 2) {
    double denom = n * sxx - sx * sx;
    if (denom > 0.0) m.row.stability_slope_s_per_min = (n * sxy - sx * sy) / denom;
  }
  m.row.unstable_flag = (n_all == 0);
  m.row.spawned = trace.size();
  std::uint64_t completed_total = 0;
  for (const TraceRecord& r : trace) completed_total += r.completed() ? 1 : 0;
  m.row.completed = completed_total;
  m.row.theta = cfg.theta;
  m.row.lambda_mean = cfg.lambda_mean_veh_per_h;
  m.row.tau_up_s = cfg.tau_up_s;
  m.row.n_car = cfg.n_car;
  m.row.seed = cfg.seed;
  m.row.scenario_id = cfg.scenario_id;
  return m;
}

}  // namespace gridflow
