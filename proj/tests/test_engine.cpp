#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "gridflow/engine.hpp"
#include "gridflow/metrics.hpp"
#include "gridflow/rng.hpp"
#include "gridflow/scenario.hpp"
#include "support/oracles.hpp"

namespace gridflow {

// Reaches into Engine internals to construct exact service and signal
// situations that the public surface only produces stochastically.
struct EngineTestAccess {
  static int slot_of(Engine& e, SegmentId seg, SegmentId next) {
    EdgeId edge = *e.g_->find_edge(seg, next);
    return e.edge_slot_[edge].second;
  }
  // n real vehicles with route {seg, next}, already waiting in the exit queue.
  static VehicleId seed_queue(Engine& e, SegmentId seg, SegmentId next, int n) {
    int slot = slot_of(e, seg, next);
    VehicleId first = static_cast<VehicleId>(e.vehicles_.size());
    for (int i = 0; i < n; ++i) {
      Vehicle v;
      v.id = static_cast<VehicleId>(e.vehicles_.size());
      v.source = seg;
      v.destination = next;
      v.route = {seg, next};
      v.entered_at_s = 0.0;
      v.segment_entry_s = -10.0;
      v.queue_seq = ++e.queue_seq_counter_;
      e.seg_state_[seg].queues[slot].push_back(v.id);
      e.vehicles_.push_back(std::move(v));
    }
    e.seg_state_[seg].occupancy += n;
    e.in_network_ += n;
    return first;
  }
  // queue entries that only matter as counts (signal actuation inputs)
  static void dummy_queue(Engine& e, SegmentId seg, SegmentId next, int n) {
    int slot = slot_of(e, seg, next);
    for (int i = 0; i < n; ++i) e.seg_state_[seg].queues[slot].push_back(0);
  }
  static std::size_t queue_len(Engine& e, SegmentId seg, SegmentId next) {
    return e.seg_state_[seg].queues[slot_of(e, seg, next)].size();
  }
  static void set_credit(Engine& e, SegmentId s, double c) { e.seg_state_[s].credit = c; }
  static int occupancy(Engine& e, SegmentId s) { return e.seg_state_[s].occupancy; }
  static void set_occupancy(Engine& e, SegmentId s, int o) { e.seg_state_[s].occupancy = o; }
  static int capacity(Engine& e, SegmentId s) { return e.seg_state_[s].capacity; }
  static int active_axis(Engine& e, IntersectionId x) { return e.signals_[x].active_axis; }
  static void set_active_axis(Engine& e, IntersectionId x, int a) {
    e.signals_[x].active_axis = a;
  }
  static void set_elapsed(Engine& e, IntersectionId x, double s) {
    e.signals_[x].elapsed_s = s;
  }
  static std::array<double, 2> greens(Engine& e, IntersectionId x) {
    return e.signals_[x].green_s;
  }
  static void serve(Engine& e) { e.serve_intersections(); }
  static void actuate(Engine& e) { e.update_signals(); }
  static void reroute(Engine& e) { e.reroute_informed(); }
  static void set_snapshot(Engine& e, WeightSnapshot s) { e.snapshot_ = std::move(s); }
  static Vehicle& add_vehicle(Engine& e, Vehicle v) {
    e.vehicles_.push_back(std::move(v));
    return e.vehicles_.back();
  }
  static Vehicle& vehicle(Engine& e, VehicleId id) { return e.vehicles_[id]; }
};

}  // namespace gridflow

using namespace gridflow;
using A = EngineTestAccess;
using gridflow::testing::TableCost;
using gridflow::testing::brute_force_shortest_path;
using gridflow::testing::random_cost_table;

namespace {

int axis_of(Heading h) {
  return (h == Heading::East || h == Heading::West) ? 0 : 1;
}

GridSpec small_spec(int rows, int cols, int lanes = 5) {
  GridSpec s;
  s.rows = rows;
  s.cols = cols;
  s.lanes_per_direction = lanes;
  s.span_m = 2000.0 * (std::max(rows, cols) + 1);
  s.highway_margin_m = 2000.0;
  return s;
}

EngineConfig base_cfg(const RoadGraph& g, double rate_veh_per_h = 0.0) {
  EngineConfig c;
  c.source_rates_veh_per_h.assign(g.sources.size(), rate_veh_per_h);
  c.od_rows.assign(g.sources.size(),
                   std::vector<double>(g.sinks.size(), 1.0 / g.sinks.size()));
  return c;
}

// an interior approach into some intersection, plus one of its turn targets
struct Approach {
  SegmentId seg;
  SegmentId next;
  IntersectionId xid;
};

Approach pick_approach(const RoadGraph& g) {
  const Intersection& x = g.intersections[0];
  SegmentId in = x.incoming.at(0);
  for (const TurnEdge& e : g.edges)
    if (e.from == in && e.intersection == x.id) return {in, e.to, x.id};
  REQUIRE(false);
  return {};
}

ScenarioConfig quick_scenario(double theta, std::uint64_t seed,
                              RoutingMode mode = RoutingMode::Mixed) {
  ScenarioConfig sc;
  sc.theta = theta;
  sc.seed = seed;
  sc.mode = mode;
  sc.sim_duration_s = 900.0;
  sc.measure_window_s = 600.0;
  return sc;
}

std::uint64_t run_hash(const ScenarioConfig& sc) {
  RoadGraph g = build_grid(sc.grid);
  Engine e(g, sc.engine_config(g));
  e.run_for(sc.sim_duration_s);
  REQUIRE(e.violations().total() == 0);
  return trace_hash(extract_trace(e));
}

}  // namespace

TEST_CASE("service credit floor: credit 2.0, queue 5, ample space -> exactly 2 cross") {
  // 2 lanes at 0.5 veh/s/lane accrue exactly 1.0 credit per 1 s tick; a
  // preset balance of 1.0 yields a spendable balance of 2.0 this tick.
  RoadGraph g = build_grid(small_spec(2, 2, /*lanes=*/2));
  Engine e(g, base_cfg(g));
  Approach ap = pick_approach(g);
  VehicleId first = A::seed_queue(e, ap.seg, ap.next, 5);
  A::set_credit(e, ap.seg, 1.0);
  A::set_active_axis(e, ap.xid, axis_of(g.segments[ap.seg].heading));
  REQUIRE(A::capacity(e, ap.next) >= 10);

  A::serve(e);
  CHECK(A::queue_len(e, ap.seg, ap.next) == 3);
  CHECK(A::occupancy(e, ap.next) == 2);
  // FIFO: the first two seeded vehicles crossed, in order
  CHECK(A::vehicle(e, first).route_pos == 1);
  CHECK(A::vehicle(e, first + 1).route_pos == 1);
  CHECK(A::vehicle(e, first + 2).route_pos == 0);
  CHECK(e.violations().fifo == 0);
}

TEST_CASE("spillback: downstream storage full -> zero cross, queue intact") {
  RoadGraph g = build_grid(small_spec(2, 2, 2));
  Engine e(g, base_cfg(g));
  Approach ap = pick_approach(g);
  A::seed_queue(e, ap.seg, ap.next, 5);
  A::set_credit(e, ap.seg, 1.0);
  A::set_active_axis(e, ap.xid, axis_of(g.segments[ap.seg].heading));
  A::set_occupancy(e, ap.next, A::capacity(e, ap.next));

  A::serve(e);
  CHECK(A::queue_len(e, ap.seg, ap.next) == 5);
  CHECK(A::occupancy(e, ap.next) == A::capacity(e, ap.next));
}

TEST_CASE("red phase: cross-axis approaches are not served") {
  RoadGraph g = build_grid(small_spec(2, 2, 2));
  Engine e(g, base_cfg(g));
  Approach ap = pick_approach(g);
  A::seed_queue(e, ap.seg, ap.next, 5);
  A::set_credit(e, ap.seg, 5.0);
  A::set_active_axis(e, ap.xid, 1 - axis_of(g.segments[ap.seg].heading));

  A::serve(e);
  CHECK(A::queue_len(e, ap.seg, ap.next) == 5);
}

TEST_CASE("actuated green split") {
  RoadGraph g = build_grid(small_spec(2, 2));
  const Intersection& x = g.intersections[0];
  auto approach_on_axis = [&](int axis) -> Approach {
    for (SegmentId in : x.incoming)
      if (axis_of(g.segments[in].heading) == axis)
        for (const TurnEdge& e : g.edges)
          if (e.from == in && e.intersection == x.id) return {in, e.to, x.id};
    REQUIRE(false);
    return {};
  };

  SUBCASE("q_NS = 30, q_EW = 10 -> greens 47.5 / 22.5") {
    Engine e(g, base_cfg(g));
    Approach ns = approach_on_axis(1), ew = approach_on_axis(0);
    A::dummy_queue(e, ns.seg, ns.next, 30);
    A::dummy_queue(e, ew.seg, ew.next, 10);
    A::set_elapsed(e, x.id, 60.0);  // force expiry
    A::actuate(e);
    auto green = A::greens(e, x.id);
    CHECK(green[1] == doctest::Approx(47.5));
    CHECK(green[0] == doctest::Approx(22.5));
  }
  SUBCASE("equal nonzero queues -> equal 35 s greens") {
    Engine e(g, base_cfg(g));
    Approach ns = approach_on_axis(1), ew = approach_on_axis(0);
    A::dummy_queue(e, ns.seg, ns.next, 7);
    A::dummy_queue(e, ew.seg, ew.next, 7);
    A::set_elapsed(e, x.id, 60.0);
    A::actuate(e);
    auto green = A::greens(e, x.id);
    CHECK(green[0] == doctest::Approx(35.0));
    CHECK(green[1] == doctest::Approx(35.0));
  }
  SUBCASE("both queues empty -> both minimum greens") {
    Engine e(g, base_cfg(g));
    A::set_elapsed(e, x.id, 60.0);
    A::actuate(e);
    auto green = A::greens(e, x.id);
    CHECK(green[0] == doctest::Approx(10.0));
    CHECK(green[1] == doctest::Approx(10.0));
  }
  SUBCASE("gap-out: empty active axis yields to a waiting cross axis") {
    Engine e(g, base_cfg(g));
    Approach ns = approach_on_axis(1);
    A::set_active_axis(e, x.id, 0);
    A::dummy_queue(e, ns.seg, ns.next, 3);
    A::set_elapsed(e, x.id, 0.0);  // green far from expiry
    A::actuate(e);
    CHECK(A::active_axis(e, x.id) == 1);
  }
}

TEST_CASE("forced reroute of one informed in-network vehicle matches enumeration") {
  RoadGraph g = build_grid(small_spec(3, 3));
  Engine e(g, base_cfg(g));

  auto table = random_cost_table(g, 777);
  WeightSnapshot snap;
  snap.epoch = 1;
  snap.costs = table;

  SegmentId from = g.sources[0];
  SegmentId dest = g.sinks[5];
  TableCost c1(g, table);
  Route r = shortest_path(g, c1, from, dest);
  REQUIRE(r.segments.size() >= 4);

  Vehicle v;
  v.id = 0;
  v.source = from;
  v.destination = dest;
  v.info_class = InfoClass::Informed;
  v.route = r.segments;
  v.entered_at_s = 0.0;
  A::add_vehicle(e, std::move(v));

  // make every edge on the committed tail 10x costlier
  auto inflated = table;
  for (std::size_t i = 1; i + 1 < r.segments.size(); ++i)
    inflated[*g.find_edge(r.segments[i], r.segments[i + 1])] *= 10.0;
  snap.costs = inflated;
  A::set_snapshot(e, snap);
  A::reroute(e);

  CHECK(e.reroute_count() == 1);
  const Vehicle& rv = A::vehicle(e, 0);
  REQUIRE(rv.route.size() >= 2);
  CHECK(rv.route[0] == r.segments[0]);      // current segment kept
  CHECK(rv.route[1] == r.segments[1]);      // committed next hop kept
  TableCost c2(g, inflated);
  std::vector<SegmentId> best_tail = brute_force_shortest_path(g, c2, rv.route[1], dest);
  CHECK(std::vector<SegmentId>(rv.route.begin() + 1, rv.route.end()) == best_tail);

  // identical snapshot again -> no further changes
  A::reroute(e);
  CHECK(e.reroute_count() == 1);
}

TEST_CASE("zero arrival rate spawns nothing; the clock still advances") {
  RoadGraph g = build_grid(small_spec(2, 2));
  Engine e(g, base_cfg(g, 0.0));
  e.run_for(100.0);
  CHECK(e.now_s() == doctest::Approx(100.0));
  CHECK(e.spawned_count() == 0);
  CHECK(e.violations().total() == 0);
}

TEST_CASE("snapshot cadence: one publication per tau_up boundary incl. t=0") {
  RoadGraph g = build_grid(small_spec(2, 2));
  EngineConfig c = base_cfg(g);
  c.tau_up_s = 180.0;
  Engine e(g, c);
  e.run_for(720.0);
  CHECK(e.snapshots_published() == 4);  // t = 0, 180, 360, 540

  EngineConfig cs = base_cfg(g);
  cs.mode = RoutingMode::StaticOnly;
  Engine es(g, cs);
  es.run_for(720.0);
  CHECK(es.snapshots_published() == 0);
}

TEST_CASE("theta 0 -> no informed vehicles, no reroutes") {
  ScenarioConfig sc = quick_scenario(0.0, 11);
  RoadGraph g = build_grid(sc.grid);
  Engine e(g, sc.engine_config(g));
  e.run_for(sc.sim_duration_s);
  REQUIRE(e.spawned_count() > 0);
  for (const Vehicle& v : e.vehicles()) CHECK(v.info_class == InfoClass::Uninformed);
  CHECK(e.reroute_count() == 0);
}

TEST_CASE("conservation and invariant counters on a loaded run") {
  ScenarioConfig sc = quick_scenario(0.5, 3);
  RoadGraph g = build_grid(sc.grid);
  Engine e(g, sc.engine_config(g));
  e.run_for(sc.sim_duration_s);
  CHECK(e.spawned_count() ==
        e.completed_count() + e.in_network_count() + e.pending_count());
  CHECK(e.violations().total() == 0);
  CHECK(e.completed_count() > 0);
}

TEST_CASE("determinism: identical config and seed -> identical traces") {
  ScenarioConfig sc = quick_scenario(0.5, 21);
  CHECK(run_hash(sc) == run_hash(sc));
  ScenarioConfig other = sc;
  other.seed = 22;
  CHECK(run_hash(other) != run_hash(sc));
}

TEST_CASE("theta 0 trace is identical to the pure static-routing mode") {
  ScenarioConfig mixed = quick_scenario(0.0, 5, RoutingMode::Mixed);
  ScenarioConfig pure = quick_scenario(0.0, 5, RoutingMode::StaticOnly);
  CHECK(run_hash(mixed) == run_hash(pure));
}

TEST_CASE("theta 1 with a single cold snapshot reproduces static routing") {
  // identical movements; only the information-class labels differ
  auto movements = [](const ScenarioConfig& sc) {
    RoadGraph g = build_grid(sc.grid);
    Engine e(g, sc.engine_config(g));
    e.run_for(sc.sim_duration_s);
    REQUIRE(e.violations().total() == 0);
    std::vector<TraceRecord> t = extract_trace(e);
    for (TraceRecord& r : t) r.info_class = InfoClass::Uninformed;
    return trace_hash(t);
  };
  ScenarioConfig dyn = quick_scenario(1.0, 9, RoutingMode::Mixed);
  dyn.tau_up_s = dyn.sim_duration_s;  // only the t = 0 publication
  ScenarioConfig sta = quick_scenario(0.0, 9, RoutingMode::StaticOnly);
  CHECK(movements(dyn) == movements(sta));
}

TEST_CASE("demand invariance: theta does not disturb arrivals or OD draws") {
  auto demand = [](double theta) {
    ScenarioConfig sc = quick_scenario(theta, 77);
    RoadGraph g = build_grid(sc.grid);
    Engine e(g, sc.engine_config(g));
    e.run_for(sc.sim_duration_s);
    std::vector<std::tuple<SegmentId, SegmentId, double>> d;
    for (const Vehicle& v : e.vehicles())
      d.emplace_back(v.source, v.destination, v.spawned_at_s);
    return d;
  };
  auto d0 = demand(0.0);
  REQUIRE(!d0.empty());
  CHECK(d0 == demand(0.5));
  CHECK(d0 == demand(1.0));
}

TEST_CASE("statistical contracts (5-sigma)") {
  SUBCASE("Poisson mean: 7200 unit-mean draws") {
    RngStream r(123, 7);
    long total = 0;
    for (int i = 0; i < 7200; ++i) total += r.poisson(1.0);
    CHECK(std::abs(total - 7200.0) < 5.0 * std::sqrt(7200.0));
  }
  SUBCASE("Bernoulli theta = 0.5 over 1e5 draws within 0.5 +- 0.008") {
    RngStream r(123, 8);
    int informed = 0;
    for (int i = 0; i < 100000; ++i) informed += r.bernoulli(0.5) ? 1 : 0;
    CHECK(std::abs(informed / 1e5 - 0.5) < 0.008);
  }
  SUBCASE("published OD row: D8 drawn with p = 0.20 +- 0.002 over 1e6") {
    RoadGraph g = build_grid(GridSpec{});
    auto od = default_od_matrix(g);
    const auto& s1 = od[0];
    CHECK(s1[7] == doctest::Approx(0.20));
    std::vector<double> cumulative(s1.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < s1.size(); ++j) cumulative[j] = (acc += s1[j]);
    RngStream r(123, 9);
    int hits = 0;
    for (int i = 0; i < 1000000; ++i) hits += r.categorical(cumulative) == 7 ? 1 : 0;
    CHECK(std::abs(hits / 1e6 - 0.20) < 0.002);
  }
  SUBCASE("degenerate and zero-probability rows") {
    RngStream r(123, 10);
    std::vector<double> degenerate = {0.0, 0.0, 1.0};
    for (int i = 0; i < 1000; ++i) CHECK(r.categorical(degenerate) == 2);
    std::vector<double> with_zero_cum = {0.5, 0.5, 1.0};  // index 1 has p = 0
    for (int i = 0; i < 100000; ++i) CHECK(r.categorical(with_zero_cum) != 1);
  }
}
