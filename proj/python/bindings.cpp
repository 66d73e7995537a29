#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gridflow/harness.hpp"
#include "gridflow/outputs.hpp"
#include "gridflow/router.hpp"

namespace py = pybind11;
using namespace gridflow;

namespace {

SegmentId source_by_label(const RoadGraph& g, const std::string& label) {
  for (SegmentId s : g.sources)
    if (g.source_label(s) == label) return s;
  throw ConfigError("unknown source label '" + label + "'");
}

SegmentId sink_by_label(const RoadGraph& g, const std::string& label) {
  for (SegmentId s : g.sinks)
    if (g.sink_label(s) == label) return s;
  throw ConfigError("unknown sink label '" + label + "'");
}

}  // namespace

PYBIND11_MODULE(gridflow, m) {
  m.doc() = "deterministic mesoscopic grid-traffic simulator and experiment harness";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_RuntimeError);
  py::register_exception<RoutingError>(m, "RoutingError", PyExc_RuntimeError);

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<>())
      .def_readwrite("rows", &GridSpec::rows)
      .def_readwrite("cols", &GridSpec::cols)
      .def_readwrite("lanes_per_direction", &GridSpec::lanes_per_direction)
      .def_readwrite("span_m", &GridSpec::span_m)
      .def_readwrite("highway_margin_m", &GridSpec::highway_margin_m)
      .def_readwrite("free_flow_speed_mps", &GridSpec::free_flow_speed_mps);

  py::class_<RoadGraph>(m, "RoadGraph")
      .def_property_readonly("n_segments",
                             [](const RoadGraph& g) { return g.segments.size(); })
      .def_property_readonly("n_edges", [](const RoadGraph& g) { return g.edges.size(); })
      .def_property_readonly(
          "n_intersections", [](const RoadGraph& g) { return g.intersections.size(); })
      .def_property_readonly("source_labels",
                             [](const RoadGraph& g) {
                               std::vector<std::string> out;
                               for (SegmentId s : g.sources) out.push_back(g.source_label(s));
                               return out;
                             })
      .def_property_readonly("sink_labels", [](const RoadGraph& g) {
        std::vector<std::string> out;
        for (SegmentId s : g.sinks) out.push_back(g.sink_label(s));
        return out;
      });

  m.def("build_grid", &build_grid, py::arg("spec") = GridSpec{});
  m.def("validate_graph", [](const RoadGraph& g) {
    std::vector<std::string> out;
    for (const Defect& d : validate_graph(g)) out.push_back(d.detail);
    return out;
  });

  m.def(
      "static_route",
      [](const RoadGraph& g, const std::string& source, const std::string& sink) {
        Route r = static_route(g, source_by_label(g, source), sink_by_label(g, sink));
        std::vector<std::string> names;
        for (SegmentId s : r.segments) names.push_back(g.segments[s].name);
        return py::make_tuple(names, r.cost_estimate);
      },
      "segment-name sequence and total distance of the shortest static route");

  m.def("default_od_matrix", &default_od_matrix);

  py::enum_<RoutingMode>(m, "RoutingMode")
      .value("Mixed", RoutingMode::Mixed)
      .value("StaticOnly", RoutingMode::StaticOnly);

  py::enum_<InfoClass>(m, "InfoClass")
      .value("Uninformed", InfoClass::Uninformed)
      .value("Informed", InfoClass::Informed);

  py::class_<MesoParams>(m, "MesoParams")
      .def(py::init<>())
      .def_readwrite("saturation_flow_veh_per_s_per_lane",
                     &MesoParams::saturation_flow_veh_per_s_per_lane)
      .def_readwrite("vehicle_length_m", &MesoParams::vehicle_length_m)
      .def_readwrite("min_green_s", &MesoParams::min_green_s)
      .def_readwrite("max_green_s", &MesoParams::max_green_s);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("scenario_id", &ScenarioConfig::scenario_id)
      .def_readwrite("grid", &ScenarioConfig::grid)
      .def_readwrite("lambda_mean_veh_per_h", &ScenarioConfig::lambda_mean_veh_per_h)
      .def_readwrite("explicit_rates_veh_per_h", &ScenarioConfig::explicit_rates_veh_per_h)
      .def_readwrite("heavy_sources", &ScenarioConfig::heavy_sources)
      .def_readwrite("heavy_factor", &ScenarioConfig::heavy_factor)
      .def_readwrite("od_matrix_file", &ScenarioConfig::od_matrix_file)
      .def_readwrite("theta", &ScenarioConfig::theta)
      .def_readwrite("tau_up_s", &ScenarioConfig::tau_up_s)
      .def_readwrite("n_car", &ScenarioConfig::n_car)
      .def_readwrite("sim_duration_s", &ScenarioConfig::sim_duration_s)
      .def_readwrite("measure_window_s", &ScenarioConfig::measure_window_s)
      .def_readwrite("dt_s", &ScenarioConfig::dt_s)
      .def_readwrite("meso", &ScenarioConfig::meso)
      .def_readwrite("mode", &ScenarioConfig::mode)
      .def_readwrite("random_static_tiebreak", &ScenarioConfig::random_static_tiebreak)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def("validate", &ScenarioConfig::validate)
      .def("to_json", &ScenarioConfig::to_json_text)
      .def_static("from_json", &ScenarioConfig::from_json_text);

  py::class_<SeriesPoint>(m, "SeriesPoint")
      .def_readonly("t_s", &SeriesPoint::t_s)
      .def_readonly("moving_avg_trip_time_s", &SeriesPoint::moving_avg_trip_time_s);

  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("vehicle_id", &TraceRecord::vehicle_id)
      .def_readonly("info_class", &TraceRecord::info_class)
      .def_readonly("source", &TraceRecord::source)
      .def_readonly("sink", &TraceRecord::sink)
      .def_readonly("spawned_s", &TraceRecord::spawned_s)
      .def_readonly("entered_s", &TraceRecord::entered_s)
      .def_readonly("completed_s", &TraceRecord::completed_s)
      .def_readonly("n_segments", &TraceRecord::n_segments)
      .def_readonly("distance_m", &TraceRecord::distance_m);

  py::class_<ResultRow>(m, "ResultRow")
      .def_readonly("scenario_id", &ResultRow::scenario_id)
      .def_readonly("theta", &ResultRow::theta)
      .def_readonly("lambda_mean", &ResultRow::lambda_mean)
      .def_readonly("tau_up_s", &ResultRow::tau_up_s)
      .def_readonly("n_car", &ResultRow::n_car)
      .def_readonly("seed", &ResultRow::seed)
      .def_readonly("spawned", &ResultRow::spawned)
      .def_readonly("completed", &ResultRow::completed)
      .def_readonly("tau_avg_all_s", &ResultRow::tau_avg_all_s)
      .def_readonly("tau_avg_informed_s", &ResultRow::tau_avg_informed_s)
      .def_readonly("tau_avg_uninformed_s", &ResultRow::tau_avg_uninformed_s)
      .def_readonly("stability_slope_s_per_min", &ResultRow::stability_slope_s_per_min)
      .def_readonly("unstable_flag", &ResultRow::unstable_flag)
      .def_readonly("error", &ResultRow::error);

  py::class_<ScenarioResult>(m, "ScenarioResult")
      .def_readonly("row", &ScenarioResult::row)
      .def_readonly("trace", &ScenarioResult::trace)
      .def_readonly("series", &ScenarioResult::series)
      .def_readonly("trace_hash", &ScenarioResult::trace_hash)
      .def_property_readonly(
          "violations", [](const ScenarioResult& r) { return r.violations.total(); });

  m.def(
      "run_scenario",
      [](const ScenarioConfig& cfg, bool keep_trace) {
        RunOptions opts;
        opts.keep_trace = keep_trace;
        return run_scenario(cfg, opts);
      },
      py::arg("config"), py::arg("keep_trace") = true,
      py::call_guard<py::gil_scoped_release>());

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("rows", &SweepResult::rows)
      .def_readonly("series", &SweepResult::series);

  m.def(
      "run_sweep",
      [](const std::string& manifest_json, const std::string& base_dir) {
        SweepPlan plan = SweepPlan::from_json_text(manifest_json, base_dir);
        return run_sweep(plan);
      },
      py::arg("manifest_json"), py::arg("base_dir") = ".",
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "emit_outputs",
      [](const std::vector<ResultRow>& rows,
         const std::vector<std::pair<std::string, std::vector<SeriesPoint>>>& series,
         const std::string& out_dir) {
        std::vector<NamedSeries> named;
        for (const auto& [id, points] : series) named.push_back({id, points});
        emit_outputs(rows, named, out_dir);
      },
      py::arg("rows"), py::arg("series"), py::arg("out_dir"));
}
