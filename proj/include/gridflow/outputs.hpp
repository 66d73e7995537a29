#pragma once

#include <string>
#include <vector>

#include "gridflow/metrics.hpp"

namespace gridflow {

struct NamedSeries {
  std::string scenario_id;
  std::vector<SeriesPoint> points;
};

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows);
void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace);
void write_series_csv(const std::string& path, const std::vector<NamedSeries>& series);

std::vector<ResultRow> read_results_csv(const std::string& path);
std::vector<NamedSeries> read_series_csv(const std::string& path);

// Static SVG charts; every byte is a pure function of the data.
// tau_avg vs theta, one line per (lambda_mean, tau_up) group, seed-averaged.
void chart_tau_vs_theta(const std::string& path, const std::vector<ResultRow>& rows);
// moving-average trip-time series, one line per scenario.
void chart_series(const std::string& path, const std::vector<NamedSeries>& series);
// tau_avg vs tau_up, one line per theta, seed-averaged.
void chart_tau_vs_tau_up(const std::string& path, const std::vector<ResultRow>& rows);
// per-class bars (all / informed / uninformed) per theta, seed-averaged.
void chart_class_bars(const std::string& path, const std::vector<ResultRow>& rows);

// results.csv + the four charts (and series.csv when series are provided).
void emit_outputs(const std::vector<ResultRow>& rows, const std::vector<NamedSeries>& series,
                  const std::string& out_dir);

}  // namespace gridflow
