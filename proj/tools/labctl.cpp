// labctl — batch experiment driver: single runs, sweeps, congestion
// calibration, config/graph validation, chart re-emission, and the built-in
// acceptance verification.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure,
// 3 acceptance-check failure (verify).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "acceptance/acceptance_suite.hpp"
#include "gridflow/harness.hpp"
#include "gridflow/outputs.hpp"

namespace fs = std::filesystem;
using namespace gridflow;

namespace {

struct Overrides {
  std::optional<double> theta;
  std::optional<double> lambda;
  std::optional<double> tau_up;
  std::optional<int> n_car;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--theta", theta, "informed share, overrides the config");
    cmd->add_option("--lambda", lambda, "mean source rate in veh/h, overrides the config");
    cmd->add_option("--tau-up", tau_up, "snapshot period in s, overrides the config");
    cmd->add_option("--n-car", n_car, "moving-average sample count, overrides the config");
    cmd->add_option("--seed", seed, "RNG seed, overrides the config");
    cmd->add_option("--mode", mode, "routing mode: mixed or static_only")
        ->check(CLI::IsMember({"mixed", "static_only"}));
  }

  ScenarioConfig apply(ScenarioConfig cfg) const {
    SweepPoint p;
    p.id = cfg.scenario_id;
    p.theta = theta;
    p.lambda_mean_veh_per_h = lambda;
    p.tau_up_s = tau_up;
    p.n_car = n_car;
    p.seed = seed;
    p.routing_mode = mode;
    return apply_point(cfg, p);
  }
};

ScenarioConfig load_config(const std::string& path) {
  if (path.empty()) return ScenarioConfig{};
  return ScenarioConfig::from_json_file(path);
}

int check_config(const ScenarioConfig& cfg) {
  auto errors = cfg.validate();
  for (const std::string& e : errors) std::fprintf(stderr, "config error: %s\n", e.c_str());
  return errors.empty() ? 0 : 1;
}

void dump_graph(const RoadGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ContractError("cannot write graph dump: " + path);
  out << "from,to,intersection,movement\n";
  for (const TurnEdge& e : g.edges)
    out << g.segments[e.from].name << ',' << g.segments[e.to].name << ','
        << g.intersections[e.intersection].name << ',' << to_string(e.movement) << '\n';
}

int cmd_run(const std::string& config_path, const Overrides& ov, const std::string& out_dir,
            bool with_trace, const std::string& graph_dump,
            const std::string& snapshot_dump) {
  ScenarioConfig cfg = ov.apply(load_config(config_path));
  if (int rc = check_config(cfg)) return rc;

  std::ofstream snap_out;
  RunOptions opts;
  if (!snapshot_dump.empty()) {
    snap_out.open(snapshot_dump);
    if (!snap_out) throw ContractError("cannot write snapshot dump: " + snapshot_dump);
    snap_out << "epoch,edge,cost_s\n";
    opts.snapshot_sink = [&snap_out](const RoadGraph& g, const WeightSnapshot& s) {
      char buf[32];
      for (const TurnEdge& e : g.edges) {
        std::snprintf(buf, sizeof buf, "%.6g", s.cost(e.id));
        snap_out << s.epoch << ',' << g.segments[e.from].name << '>'
                 << g.segments[e.to].name << ',' << buf << '\n';
      }
    };
  }
  if (!graph_dump.empty()) dump_graph(build_grid(cfg.grid), graph_dump);

  ScenarioResult r = run_scenario(cfg, opts);
  fs::create_directories(out_dir);
  emit_outputs({r.row}, {{r.row.scenario_id, r.series}}, out_dir);
  if (with_trace) write_trace_csv(out_dir + "/trace.csv", r.trace);

  std::printf("scenario %s: spawned %llu, completed %llu, tau_avg %.1f s, slope %.3f s/min\n",
              r.row.scenario_id.c_str(), static_cast<unsigned long long>(r.row.spawned),
              static_cast<unsigned long long>(r.row.completed), r.row.tau_avg_all_s,
              r.row.stability_slope_s_per_min);
  if (r.violations.total() != 0) {
    std::fprintf(stderr, "invariant violations detected: %llu\n",
                 static_cast<unsigned long long>(r.violations.total()));
    return 2;
  }
  return 0;
}

int cmd_sweep(const std::string& manifest_path, const std::string& out_dir) {
  SweepPlan plan = SweepPlan::from_json_file(manifest_path);
  if (int rc = check_config(plan.base)) return rc;
  SweepResult res = run_sweep(plan);
  fs::create_directories(out_dir);
  std::vector<NamedSeries> series;
  for (std::size_t i = 0; i < res.rows.size(); ++i)
    series.push_back({res.rows[i].scenario_id, res.series[i]});
  emit_outputs(res.rows, series, out_dir);
  int failed = 0;
  for (const ResultRow& row : res.rows) {
    if (!row.error.empty()) {
      ++failed;
      std::fprintf(stderr, "point %s failed: %s\n", row.scenario_id.c_str(),
                   row.error.c_str());
    }
  }
  std::printf("%zu points, %d failed, results in %s\n", res.rows.size(), failed,
              out_dir.c_str());
  return failed == 0 ? 0 : 2;
}

int cmd_calibrate(const std::string& config_path, const std::string& regime_name,
                  CalibrationOptions opts) {
  ScenarioConfig base = load_config(config_path);
  if (int rc = check_config(base)) return rc;
  Regime regime = regime_name == "high" ? Regime::High : Regime::Low;
  CalibrationResult res = calibrate_congestion(base, regime, opts);
  for (const CalibrationProbe& p : res.probes)
    std::printf("probe lambda=%.1f: %s (%s)\n", p.lambda, p.predicate ? "yes" : "no",
                p.note.c_str());
  std::printf("%s-regime lambda: %.1f veh/h/source\n", regime_name.c_str(), res.lambda);
  return 0;
}

int cmd_validate(const std::string& config_path) {
  ScenarioConfig cfg = load_config(config_path);
  int rc = check_config(cfg);
  if (rc) return rc;
  RoadGraph g = build_grid(cfg.grid);
  auto defects = validate_graph(g);
  for (const Defect& d : defects)
    std::fprintf(stderr, "graph defect: %s\n", d.detail.c_str());
  if (!defects.empty()) return 1;
  std::printf("config ok; graph ok (%zu segments, %zu turn edges, %zu intersections)\n",
              g.segments.size(), g.edges.size(), g.intersections.size());
  return 0;
}

int cmd_plot(const std::string& results_path, const std::string& series_path,
             const std::string& out_dir) {
  std::vector<ResultRow> rows = read_results_csv(results_path);
  std::vector<NamedSeries> series;
  if (!series_path.empty()) series = read_series_csv(series_path);
  fs::create_directories(out_dir);
  emit_outputs(rows, series, out_dir);
  std::printf("charts for %zu rows written to %s\n", rows.size(), out_dir.c_str());
  return 0;
}

int cmd_verify() {
  gridflow::acceptance::SuiteResult suite =
      gridflow::acceptance::run_acceptance_suite(true);
  return suite.all_passed() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mesoscopic grid-traffic experiment driver"};
  app.require_subcommand(1);

  std::string config_path, manifest_path, out_dir = "out";
  std::string graph_dump, snapshot_dump;
  std::string regime = "high";
  std::string results_path, series_path;
  bool with_trace = false;
  Overrides ov;
  CalibrationOptions copts;

  CLI::App* run = app.add_subcommand("run", "run one scenario and emit results");
  run->add_option("--config", config_path, "scenario config JSON (defaults when omitted)");
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--trace", with_trace, "also write the per-vehicle trace CSV");
  run->add_option("--dump-graph", graph_dump, "write the turn-edge adjacency list CSV");
  run->add_option("--dump-snapshots", snapshot_dump, "write every published snapshot CSV");
  ov.add_flags(run);

  CLI::App* sweep = app.add_subcommand("sweep", "run a sweep manifest");
  sweep->add_option("--manifest", manifest_path, "sweep manifest JSON")->required();
  sweep->add_option("--out", out_dir, "output directory");

  CLI::App* cal = app.add_subcommand("calibrate", "search for a load regime");
  cal->add_option("--config", config_path, "base scenario config JSON");
  cal->add_option("--regime", regime, "low or high")
      ->check(CLI::IsMember({"low", "high"}));
  cal->add_option("--seeds", copts.seeds, "replications per probe");
  cal->add_option("--threshold", copts.instability_threshold_s_per_min,
                  "instability slope threshold in s/min");
  cal->add_option("--resolution", copts.resolution, "relative bisection resolution");

  CLI::App* val = app.add_subcommand("validate", "validate a config and its graph");
  val->add_option("--config", config_path, "scenario config JSON");

  CLI::App* plot = app.add_subcommand("plot", "re-emit charts from a results CSV");
  plot->add_option("--results", results_path, "results CSV")->required();
  plot->add_option("--series", series_path, "series CSV (optional)");
  plot->add_option("--out", out_dir, "output directory");

  app.add_subcommand("verify", "run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help returns 0; any usage mistake is a configuration error
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (run->parsed())
      return cmd_run(config_path, ov, out_dir, with_trace, graph_dump, snapshot_dump);
    if (sweep->parsed()) return cmd_sweep(manifest_path, out_dir);
    if (cal->parsed()) return cmd_calibrate(config_path, regime, copts);
    if (val->parsed()) return cmd_validate(config_path);
    if (plot->parsed()) return cmd_plot(results_path, series_path, out_dir);
    return cmd_verify();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime failure: %s\n", e.what());
    return 2;
  }
}
