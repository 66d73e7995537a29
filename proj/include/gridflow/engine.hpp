#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <unordered_map>
#include <vector>

#include "gridflow/grid.hpp"
#include "gridflow/rng.hpp"
#include "gridflow/router.hpp"
#include "gridflow/telemetry.hpp"

namespace gridflow {

enum class InfoClass : std::uint8_t { Uninformed, Informed };

// Mixed runs scenario (C) semantics (theta selects the informed share;
// theta 0 and 1 degenerate to scenarios A and B). StaticOnly is scenario (A)
// with the information plane switched off entirely.
enum class RoutingMode : std::uint8_t { Mixed, StaticOnly };

struct MesoParams {
  double saturation_flow_veh_per_s_per_lane = 0.5;  // 1800 veh/h/lane
  double vehicle_length_m = 7.5;                    // storage footprint
  double min_green_s = 10.0;
  double max_green_s = 60.0;
};

struct EngineConfig {
  double theta = 0.0;
  double tau_up_s = 180.0;
  int n_car = 10;
  double dt_s = 1.0;
  RoutingMode mode = RoutingMode::Mixed;
  bool random_static_tiebreak = false;
  std::uint64_t seed = 1;
  std::vector<double> source_rates_veh_per_h;   // per source, S1.. order
  std::vector<std::vector<double>> od_rows;     // per source: probability per sink
  MesoParams meso;
};

struct Vehicle {
  VehicleId id = 0;
  SegmentId source = kInvalidSegment;
  SegmentId destination = kInvalidSegment;
  InfoClass info_class = InfoClass::Uninformed;
  std::vector<SegmentId> route;  // route[route_pos] is the current segment
  std::size_t route_pos = 0;
  double spawned_at_s = 0.0;
  double entered_at_s = -1.0;    // < 0 until stub admission
  double completed_at_s = -1.0;  // < 0 until trip completion
  double segment_entry_s = 0.0;
  double distance_m = 0.0;       // sum of entered segment lengths
  int n_segments = 0;
  double free_flow_sum_s = 0.0;
  std::uint64_t queue_seq = 0;

  bool entered() const { return entered_at_s >= 0.0; }
  bool completed() const { return completed_at_s >= 0.0; }
  SegmentId current_segment() const { return route[route_pos]; }
};

// Runtime-invariant violations observed during a run; all-zero on a healthy
// simulation. Checked every tick.
struct InvariantCounters {
  std::uint64_t conservation = 0;
  std::uint64_t storage = 0;
  std::uint64_t fifo = 0;
  std::uint64_t trip_time = 0;
  std::uint64_t total() const { return conservation + storage + fifo + trip_time; }
};

// Discrete-time mesoscopic engine: Poisson arrivals, spatial-queue link
// propagation with spillback, queue-actuated two-phase signals, and
// per-class routing behavior against periodically published snapshots.
class Engine {
 public:
  Engine(const RoadGraph& g, EngineConfig cfg);

  // One dt tick: snapshot publication + reroutes (at tau_up boundaries),
  // arrivals + stub admission, link advancement, signal actuation,
  // intersection service.
  void step();
  void run_for(double duration_s);

  double now_s() const { return tick_ * cfg_.dt_s; }
  const RoadGraph& graph() const { return *g_; }
  const EngineConfig& config() const { return cfg_; }
  const Telemetry& telemetry() const { return telemetry_; }
  const WeightSnapshot& current_snapshot() const { return snapshot_; }

  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  std::uint64_t spawned_count() const { return vehicles_.size(); }
  std::uint64_t completed_count() const { return completed_; }
  std::uint64_t in_network_count() const { return in_network_; }
  std::uint64_t pending_count() const { return pending_total_; }
  std::uint64_t snapshots_published() const { return snapshots_published_; }
  std::uint64_t reroute_count() const { return reroutes_; }
  const InvariantCounters& violations() const { return violations_; }

  // Invoked on every snapshot publication (debug dumps).
  std::function<void(const WeightSnapshot&)> on_snapshot;

 private:
  // White-box hook for constructing exact service/signal situations in tests.
  friend struct EngineTestAccess;

  struct SegState {
    int occupancy = 0;
    int capacity = 0;
    std::deque<VehicleId> running;  // FIFO; exit-ready in entry order
    std::array<std::deque<VehicleId>, 3> queues;  // through, right, left
    std::array<EdgeId, 3> queue_edge{kInvalidEdge, kInvalidEdge, kInvalidEdge};
    std::array<std::uint64_t, 3> last_served_seq{0, 0, 0};
    int n_queues = 0;
    double credit = 0.0;
    int rr = 0;  // next queue slot to try
    int axis = 0;  // 0 = EW, 1 = NS
  };

  struct Signal {
    int active_axis = 0;
    double elapsed_s = 0.0;
    std::array<double, 2> green_s{0.0, 0.0};
  };

  struct Source {
    SegmentId seg = kInvalidSegment;
    double rate_per_s = 0.0;
    std::vector<double> od_cumulative;  // over sink indices
    std::deque<VehicleId> pending;
  };

  void publish_and_apply();
  void spawn_and_admit();
  void advance_links();
  void update_signals();
  void serve_intersections();
  void check_invariants();

  void enter_segment(Vehicle& v, SegmentId s);
  void complete_trip(Vehicle& v);
  void cross(VehicleId vid, SegmentId from, int slot);
  const std::vector<SegmentId>& cached_static(SegmentId from, SegmentId dest);
  const std::vector<SegmentId>& cached_dynamic(SegmentId from, SegmentId dest);
  std::vector<SegmentId> jittered_static(SegmentId from, SegmentId dest, VehicleId vid);
  void reroute_informed();

  const RoadGraph* g_;
  EngineConfig cfg_;
  Telemetry telemetry_;
  WeightSnapshot snapshot_;

  std::vector<Vehicle> vehicles_;
  std::vector<SegState> seg_state_;   // by SegmentId
  std::vector<Signal> signals_;       // by IntersectionId
  std::vector<Source> sources_;
  // incoming segments per intersection per axis, id order
  std::vector<std::array<std::vector<SegmentId>, 2>> approaches_;
  std::vector<std::pair<SegmentId, int>> edge_slot_;  // EdgeId -> (segment, queue slot)

  RngStream rng_arrivals_;
  RngStream rng_info_;
  RngStream rng_signal_;

  std::uint64_t tick_ = 0;
  std::uint64_t ticks_per_update_ = 1;
  std::uint64_t completed_ = 0;
  std::uint64_t in_network_ = 0;
  std::uint64_t pending_total_ = 0;
  std::uint64_t snapshots_published_ = 0;
  std::uint64_t reroutes_ = 0;
  std::uint64_t queue_seq_counter_ = 0;
  InvariantCounters violations_;

  std::unordered_map<std::uint64_t, std::vector<SegmentId>> static_cache_;
  std::unordered_map<std::uint64_t, std::vector<SegmentId>> dynamic_cache_;
};

}  // namespace gridflow
