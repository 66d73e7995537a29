#pragma once

#include <cstdint>
#include <vector>

#include "gridflow/grid.hpp"

namespace gridflow {

// One completed edge traversal: time from entering the from-segment to
// entering the to-segment, intersection wait included.
struct TraversalSample {
  EdgeId edge = kInvalidEdge;
  double duration_s = 0.0;
  double completed_at_s = 0.0;
};

// Immutable per-edge cost table, indexed by EdgeId.
struct WeightSnapshot {
  double published_at_s = 0.0;
  std::uint64_t epoch = 0;
  std::vector<double> costs;

  double cost(EdgeId e) const { return costs.at(e); }
  bool covers(const RoadGraph& g) const { return costs.size() == g.edges.size(); }
};

// The coordinator's information plane: a bounded last-N_car sample ring per
// turn edge. Edges with no samples fall back to the free-flow traversal
// time of their from-segment.
class Telemetry {
 public:
  Telemetry(const RoadGraph& g, int n_car);

  void record_traversal(const TraversalSample& sample);
  double moving_average(EdgeId edge) const;
  WeightSnapshot publish_snapshot(double now_s);

  int n_car() const { return n_car_; }
  std::uint64_t epoch() const { return epoch_; }

 private:
  struct Ring {
    std::vector<double> buf;  // capacity n_car
    std::size_t head = 0;  // next write slot
    std::size_t size = 0;
  };

  const RoadGraph* graph_;
  int n_car_;
  std::vector<Ring> rings_;      // by EdgeId
  std::vector<double> fallback_;  // free-flow of from-segment, by EdgeId
  std::uint64_t epoch_ = 0;
  double last_published_s_ = 0.0;
};

}  // namespace gridflow
