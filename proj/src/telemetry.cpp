#include "gridflow/telemetry.hpp"

namespace gridflow {

Telemetry::Telemetry(const RoadGraph& g, int n_car) : graph_(&g), n_car_(n_car) {
  if (n_car < 1) throw ConfigError("n_car must be >= 1");
  rings_.resize(g.edges.size());
  fallback_.resize(g.edges.size());
  for (const TurnEdge& e : g.edges) {
    rings_[e.id].buf.assign(static_cast<std::size_t>(n_car), 0.0);
    fallback_[e.id] = g.segments[e.from].free_flow_s();
  }
}

void Telemetry::record_traversal(const TraversalSample& sample) {
  if (sample.edge >= rings_.size())
    throw ContractError("record_traversal: unknown edge id " + std::to_string(sample.edge));
  if (sample.duration_s <= 0.0)
    throw ContractError("record_traversal: duration_s must be > 0");
  Ring& r = rings_[sample.edge];
  r.buf[r.head] = sample.duration_s;
  r.head = (r.head + 1) % r.buf.size();
  if (r.size < r.buf.size()) ++r.size;
}

double Telemetry::moving_average(EdgeId edge) const {
  const Ring& r = rings_.at(edge);
  if (r.size == 0) return fallback_[edge];
  double sum = 0.0;
  // oldest-first scan over the occupied slots
  std::size_t start = (r.head + r.buf.size() - r.size) % r.buf.size();
  for (std::size_t k = 0; k < r.size; ++k) sum += r.buf[(start + k) % r.buf.size()];
  return sum / static_cast<double>(r.size);
}

WeightSnapshot Telemetry::publish_snapshot(double now_s) {
  WeightSnapshot snap;
  snap.published_at_s = now_s;
  snap.epoch = ++epoch_;
  snap.costs.resize(rings_.size());
  for (EdgeId e = 0; e < rings_.size(); ++e) snap.costs[e] = moving_average(e);
  last_published_s_ = now_s;
  return snap;
}

}  // namespace gridflow
