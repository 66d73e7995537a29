#include "gridflow/router.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace gridflow {

SnapshotCost::SnapshotCost(const RoadGraph& g, const WeightSnapshot& snap)
    : g_(&g), snap_(&snap) {
  if (!snap.covers(g))
    throw ContractError("snapshot covers " + std::to_string(snap.costs.size()) +
                        " edges, graph has " + std::to_string(g.edges.size()));
}

Route shortest_path(const RoadGraph& g, const CostProvider& costs, SegmentId from,
                    SegmentId to, double computed_at_s) {
  if (from >= g.segments.size() || to >= g.segments.size())
    throw ContractError("shortest_path: segment id out of range");

  Route route;
  route.computed_at_s = computed_at_s;

  if (from == to) {
    route.segments = {to};
    route.cost_estimate = costs.terminal_cost(to);
    return route;
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(g.segments.size(), kInf);
  std::vector<SegmentId> pred(g.segments.size(), kInvalidSegment);
  std::vector<char> settled(g.segments.size(), 0);

  using Item = std::pair<double, SegmentId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[from] = 0.0;
  heap.push({0.0, from});

  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (settled[u]) continue;
    settled[u] = 1;
    if (u == to) break;
    for (EdgeId e : g.out_edges[u]) {
      double c = costs.edge_cost(e);
      if (!(std::isfinite(c) && c > 0.0))
        throw ContractError("shortest_path: non-positive or non-finite edge cost on edge " +
                            std::to_string(e));
      SegmentId v = g.edges[e].to;
      double nd = d + c;
      if (nd < dist[v]) {
        dist[v] = nd;
        pred[v] = u;
        heap.push({nd, v});
      }
    }
  }

  if (!settled[to])
    throw RoutingError("no path from " + g.segments[from].name + " to " +
                       g.segments[to].name);

  for (SegmentId v = to; v != kInvalidSegment; v = pred[v]) route.segments.push_back(v);
  std::reverse(route.segments.begin(), route.segments.end());
  route.cost_estimate = dist[to] + costs.terminal_cost(to);
  return route;
}

Route static_route(const RoadGraph& g, SegmentId from, SegmentId to, double computed_at_s) {
  return shortest_path(g, StaticDistanceCost(g), from, to, computed_at_s);
}

Route dynamic_route(const RoadGraph& g, const WeightSnapshot& snap, SegmentId from,
                    SegmentId to, double computed_at_s) {
  return shortest_path(g, SnapshotCost(g, snap), from, to, computed_at_s);
}

}  // namespace gridflow
