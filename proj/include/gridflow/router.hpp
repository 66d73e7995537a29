#pragma once

#include <vector>

#include "gridflow/grid.hpp"
#include "gridflow/telemetry.hpp"

namespace gridflow {

// Edge-cost source for shortest-path search. Costs must be finite and > 0.
class CostProvider {
 public:
  virtual ~CostProvider() = default;
  virtual double edge_cost(EdgeId e) const = 0;
  // Cost of traversing the final sink stub, appended to the path cost.
  virtual double terminal_cost(SegmentId sink) const = 0;
};

// Static routing: the weight of edge (v_i -> v_j) is the length of v_i in
// meters; the terminal cost is the sink stub's length.
class StaticDistanceCost final : public CostProvider {
 public:
  explicit StaticDistanceCost(const RoadGraph& g) : g_(&g) {}
  double edge_cost(EdgeId e) const override { return g_->segments[g_->edges[e].from].length_m; }
  double terminal_cost(SegmentId sink) const override { return g_->segments[sink].length_m; }

 private:
  const RoadGraph* g_;
};

// Dynamic routing: edge weights come from a published snapshot (seconds);
// the terminal cost is the sink stub's free-flow time.
class SnapshotCost final : public CostProvider {
 public:
  SnapshotCost(const RoadGraph& g, const WeightSnapshot& snap);
  double edge_cost(EdgeId e) const override { return snap_->cost(e); }
  double terminal_cost(SegmentId sink) const override { return g_->segments[sink].free_flow_s(); }

 private:
  const RoadGraph* g_;
  const WeightSnapshot* snap_;
};

struct Route {
  std::vector<SegmentId> segments;  // current position first, sink stub last
  double cost_estimate = 0.0;
  double computed_at_s = 0.0;
};

// Binary-heap Dijkstra with deterministic ties: the priority queue orders by
// (cost, segment id), and adjacency is pre-sorted by destination id, so the
// returned route is independent of edge insertion order.
Route shortest_path(const RoadGraph& g, const CostProvider& costs, SegmentId from,
                    SegmentId to, double computed_at_s = 0.0);

Route static_route(const RoadGraph& g, SegmentId from, SegmentId to,
                   double computed_at_s = 0.0);

Route dynamic_route(const RoadGraph& g, const WeightSnapshot& snap, SegmentId from,
                    SegmentId to, double computed_at_s = 0.0);

}  // namespace gridflow
