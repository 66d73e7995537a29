#include "gridflow/engine.hpp"

#include <algorithm>
#include <cmath>

namespace gridflow {

namespace {

constexpr std::uint64_t kArrivalsTag = 0x61727276ULL;  // "arrv"
constexpr std::uint64_t kInfoTag = 0x696e666fULL;      // "info"
constexpr std::uint64_t kSignalTag = 0x7369676eULL;    // "sign"

int axis_of(Heading h) {
  return (h == Heading::East || h == Heading::West) ? 0 : 1;
}

std::uint64_t pair_key(SegmentId a, SegmentId b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

// Multiplicative per-vehicle jitter used only by the optional random
// static tie-break switch.
class JitteredStaticCost final : public CostProvider {
 public:
  JitteredStaticCost(const RoadGraph& g, std::uint64_t vehicle_seed)
      : base_(g), seed_(vehicle_seed) {}
  double edge_cost(EdgeId e) const override {
    double u = (mix64(seed_ ^ (e + 1)) >> 11) * 0x1.0p-53;
    return base_.edge_cost(e) * (1.0 + 1e-8 * u);
  }
  double terminal_cost(SegmentId sink) const override { return base_.terminal_cost(sink); }

 private:
  StaticDistanceCost base_;
  std::uint64_t seed_;
};

}  // namespace

Engine::Engine(const RoadGraph& g, EngineConfig cfg)
    : g_(&g),
      cfg_(std::move(cfg)),
      telemetry_(g, cfg_.n_car),
      rng_arrivals_(cfg_.seed, kArrivalsTag),
      rng_info_(cfg_.seed, kInfoTag),
      rng_signal_(cfg_.seed, kSignalTag) {
  if (cfg_.theta < 0.0 || cfg_.theta > 1.0) throw ConfigError("theta must be in [0,1]");
  if (cfg_.dt_s <= 0.0) throw ConfigError("dt_s must be > 0");
  if (cfg_.tau_up_s <= 0.0) throw ConfigError("tau_up_s must be > 0");
  ticks_per_update_ = static_cast<std::uint64_t>(std::llround(cfg_.tau_up_s / cfg_.dt_s));
  if (ticks_per_update_ == 0 ||
      std::abs(ticks_per_update_ * cfg_.dt_s - cfg_.tau_up_s) > 1e-9)
    throw ConfigError("tau_up_s must be a positive multiple of dt_s");
  if (cfg_.meso.min_green_s <= 0.0 || cfg_.meso.max_green_s < cfg_.meso.min_green_s)
    throw ConfigError("signal green bounds require 0 < min_green_s <= max_green_s");
  if (cfg_.meso.saturation_flow_veh_per_s_per_lane <= 0.0)
    throw ConfigError("saturation flow must be > 0");
  if (cfg_.meso.vehicle_length_m <= 0.0) throw ConfigError("vehicle_length_m must be > 0");
  if (cfg_.source_rates_veh_per_h.size() != g.sources.size())
    throw ConfigError("source rate vector must have one entry per source (" +
                      std::to_string(g.sources.size()) + ")");
  if (cfg_.od_rows.size() != g.sources.size())
    throw ConfigError("OD matrix must have one row per source");

  seg_state_.resize(g.segments.size());
  edge_slot_.assign(g.edges.size(), {kInvalidSegment, -1});
  for (const RoadSegment& s : g.segments) {
    SegState& st = seg_state_[s.id];
    st.capacity = std::max(1, static_cast<int>(s.lanes * s.length_m /
                                               cfg_.meso.vehicle_length_m));
    st.axis = axis_of(s.heading);
    // queue slots in service order: through, right, left
    const Movement order[3] = {Movement::Through, Movement::Right, Movement::Left};
    for (int k = 0; k < 3; ++k) {
      for (EdgeId e : g.out_edges[s.id]) {
        if (g.edges[e].movement == order[k]) {
          st.queue_edge[st.n_queues] = e;
          edge_slot_[e] = {s.id, st.n_queues};
          ++st.n_queues;
          break;
        }
      }
    }
  }

  approaches_.resize(g.intersections.size());
  for (const Intersection& x : g.intersections) {
    for (SegmentId in : x.incoming)
      approaches_[x.id][axis_of(g.segments[in].heading)].push_back(in);
    for (auto& v : approaches_[x.id]) std::sort(v.begin(), v.end());
  }

  signals_.resize(g.intersections.size());
  for (Signal& sig : signals_) {
    sig.green_s = {cfg_.meso.min_green_s, cfg_.meso.min_green_s};
    sig.active_axis = rng_signal_.bernoulli(0.5) ? 1 : 0;
  }

  sources_.resize(g.sources.size());
  for (std::size_t i = 0; i < g.sources.size(); ++i) {
    Source& src = sources_[i];
    src.seg = g.sources[i];
    double rate = cfg_.source_rates_veh_per_h[i];
    if (rate < 0.0) throw ConfigError("negative rate for source " + std::to_string(i + 1));
    src.rate_per_s = rate / 3600.0;
    const auto& row = cfg_.od_rows[i];
    if (row.size() != g.sinks.size())
      throw ConfigError("OD row " + std::to_string(i + 1) + " must have one entry per sink");
    double sum = 0.0;
    src.od_cumulative.resize(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] < 0.0) throw ConfigError("negative OD probability");
      sum += row[j];
      src.od_cumulative[j] = sum;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ConfigError("OD row " + std::to_string(i + 1) + " sums to " +
                        std::to_string(sum) + ", expected 1");
  }
}

void Engine::step() {
  publish_and_apply();
  spawn_and_admit();
  advance_links();
  update_signals();
  serve_intersections();
  for (Signal& sig : signals_) sig.elapsed_s += cfg_.dt_s;
  check_invariants();
  ++tick_;
}

void Engine::run_for(double duration_s) {
  while (now_s() < duration_s) step();
}

void Engine::publish_and_apply() {
  if (cfg_.mode == RoutingMode::StaticOnly) return;
  if (tick_ % ticks_per_update_ != 0) return;
  snapshot_ = telemetry_.publish_snapshot(now_s());
  ++snapshots_published_;
  dynamic_cache_.clear();
  if (on_snapshot) on_snapshot(snapshot_);
  reroute_informed();
}

const std::vector<SegmentId>& Engine::cached_static(SegmentId from, SegmentId dest) {
  auto [it, inserted] = static_cache_.try_emplace(pair_key(from, dest));
  if (inserted) it->second = static_route(*g_, from, dest, now_s()).segments;
  return it->second;
}

const std::vector<SegmentId>& Engine::cached_dynamic(SegmentId from, SegmentId dest) {
  auto [it, inserted] = dynamic_cache_.try_emplace(pair_key(from, dest));
  if (inserted) it->second = dynamic_route(*g_, snapshot_, from, dest, now_s()).segments;
  return it->second;
}

std::vector<SegmentId> Engine::jittered_static(SegmentId from, SegmentId dest, VehicleId vid) {
  JitteredStaticCost costs(*g_, mix64(cfg_.seed ^ (0x7469650000ULL + vid)));
  return shortest_path(*g_, costs, from, dest, now_s()).segments;
}

void Engine::reroute_informed() {
  for (Vehicle& v : vehicles_) {
    if (v.info_class != InfoClass::Informed || v.completed()) continue;
    if (!v.entered()) {
      const auto& fresh = cached_dynamic(v.source, v.destination);
      if (fresh != v.route) {
        v.route = fresh;
        v.route_pos = 0;
        ++reroutes_;
      }
      continue;
    }
    // In-network: the current segment and the committed next turn are kept;
    // only the tail from the next segment onward is recomputed.
    if (v.route_pos + 1 >= v.route.size()) continue;  // already on the sink stub
    SegmentId cur = v.route[v.route_pos];
    SegmentId next = v.route[v.route_pos + 1];
    const auto& tail = cached_dynamic(next, v.destination);
    bool same = v.route.size() - v.route_pos == tail.size() + 1 &&
                std::equal(tail.begin(), tail.end(), v.route.begin() + v.route_pos + 1);
    if (same) continue;
    std::vector<SegmentId> fresh;
    fresh.reserve(tail.size() + 1);
    fresh.push_back(cur);
    fresh.insert(fresh.end(), tail.begin(), tail.end());
    v.route = std::move(fresh);
    v.route_pos = 0;
    ++reroutes_;
  }
}

void Engine::spawn_and_admit() {
  const double t = now_s();
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    Source& src = sources_[i];
    int n = rng_arrivals_.poisson(src.rate_per_s * cfg_.dt_s);
    for (int k = 0; k < n; ++k) {
      int sink_idx = rng_arrivals_.categorical(src.od_cumulative);
      Vehicle v;
      v.id = static_cast<VehicleId>(vehicles_.size());
      v.source = src.seg;
      v.destination = g_->sinks[static_cast<std::size_t>(sink_idx)];
      v.spawned_at_s = t;
      if (cfg_.mode == RoutingMode::Mixed)
        v.info_class = rng_info_.bernoulli(cfg_.theta) ? InfoClass::Informed
                                                       : InfoClass::Uninformed;
      if (v.info_class == InfoClass::Informed)
        v.route = cached_dynamic(v.source, v.destination);
      else if (cfg_.random_static_tiebreak)
        v.route = jittered_static(v.source, v.destination, v.id);
      else
        v.route = cached_static(v.source, v.destination);
      vehicles_.push_back(std::move(v));
      src.pending.push_back(vehicles_.back().id);
      ++pending_total_;
    }
    SegState& stub = seg_state_[src.seg];
    while (!src.pending.empty() && stub.occupancy < stub.capacity) {
      Vehicle& v = vehicles_[src.pending.front()];
      src.pending.pop_front();
      --pending_total_;
      v.entered_at_s = t;
      ++in_network_;
      enter_segment(v, src.seg);
    }
  }
}

void Engine::enter_segment(Vehicle& v, SegmentId s) {
  const RoadSegment& seg = g_->segments[s];
  SegState& st = seg_state_[s];
  ++st.occupancy;
  v.segment_entry_s = now_s();
  v.distance_m += seg.length_m;
  v.n_segments += 1;
  v.free_flow_sum_s += seg.free_flow_s();
  st.running.push_back(v.id);
}

void Engine::complete_trip(Vehicle& v) {
  v.completed_at_s = now_s();
  --seg_state_[v.current_segment()].occupancy;
  --in_network_;
  ++completed_;
  double duration = v.completed_at_s - v.entered_at_s;
  if (duration + v.n_segments * cfg_.dt_s + 1e-9 < v.free_flow_sum_s)
    ++violations_.trip_time;
}

void Engine::advance_links() {
  const double t = now_s();
  for (SegmentId s = 0; s < seg_state_.size(); ++s) {
    SegState& st = seg_state_[s];
    const double ff = g_->segments[s].free_flow_s();
    while (!st.running.empty()) {
      Vehicle& v = vehicles_[st.running.front()];
      if (v.segment_entry_s + ff > t) break;
      st.running.pop_front();
      if (s == v.destination) {
        complete_trip(v);
        continue;
      }
      if (v.route_pos + 1 >= v.route.size())
        throw ContractError("vehicle " + std::to_string(v.id) +
                            " has no next segment and is not at its destination");
      SegmentId next = v.route[v.route_pos + 1];
      auto e = g_->find_edge(s, next);
      if (!e)
        throw ContractError("vehicle " + std::to_string(v.id) +
                            " route uses a nonexistent turn edge");
      int slot = edge_slot_[*e].second;
      v.queue_seq = ++queue_seq_counter_;
      st.queues[slot].push_back(v.id);
    }
  }
}

void Engine::update_signals() {
  for (const Intersection& x : g_->intersections) {
    Signal& sig = signals_[x.id];
    double q[2] = {0.0, 0.0};
    for (int axis = 0; axis < 2; ++axis)
      for (SegmentId s : approaches_[x.id][axis]) {
        const SegState& st = seg_state_[s];
        for (int k = 0; k < st.n_queues; ++k) q[axis] += st.queues[k].size();
      }
    int other = 1 - sig.active_axis;
    bool timed_out = sig.elapsed_s >= sig.green_s[sig.active_axis];
    // Early gap-out: the active axis has nothing to serve while the cross
    // axis has demand.
    bool gap_out = q[sig.active_axis] == 0.0 && q[other] > 0.0;
    if (!timed_out && !gap_out) continue;
    double total = q[0] + q[1];
    const double lo = cfg_.meso.min_green_s;
    const double hi = cfg_.meso.max_green_s;
    for (int axis = 0; axis < 2; ++axis) {
      double share = total > 0.0 ? q[axis] / total : 0.0;
      sig.green_s[axis] = std::clamp(lo + (hi - lo) * share, lo, hi);
    }
    sig.active_axis = other;
    sig.elapsed_s = 0.0;
  }
}

void Engine::serve_intersections() {
  const double accrual = cfg_.meso.saturation_flow_veh_per_s_per_lane * cfg_.dt_s;
  for (const Intersection& x : g_->intersections) {
    const Signal& sig = signals_[x.id];
    for (SegmentId s : approaches_[x.id][sig.active_axis]) {
      SegState& st = seg_state_[s];
      double seg_accrual = accrual * g_->segments[s].lanes;
      st.credit = std::min(st.credit + seg_accrual, seg_accrual + 1.0);
      while (st.credit >= 1.0) {
        bool served = false;
        for (int k = 0; k < st.n_queues; ++k) {
          int slot = (st.rr + k) % st.n_queues;
          if (st.queues[slot].empty()) continue;
          EdgeId e = st.queue_edge[slot];
          SegmentId to = g_->edges[e].to;
          if (seg_state_[to].occupancy >= seg_state_[to].capacity) continue;  // spillback
          cross(st.queues[slot].front(), s, slot);
          st.queues[slot].pop_front();
          st.credit -= 1.0;
          st.rr = (slot + 1) % st.n_queues;
          served = true;
          break;
        }
        if (!served) break;
      }
    }
  }
}

void Engine::cross(VehicleId vid, SegmentId from, int slot) {
  Vehicle& v = vehicles_[vid];
  SegState& st = seg_state_[from];
  if (v.queue_seq <= st.last_served_seq[slot]) ++violations_.fifo;
  st.last_served_seq[slot] = v.queue_seq;

  EdgeId e = st.queue_edge[slot];
  TraversalSample sample;
  sample.edge = e;
  sample.duration_s = now_s() - v.segment_entry_s;
  sample.completed_at_s = now_s();
  telemetry_.record_traversal(sample);

  --st.occupancy;
  ++v.route_pos;
  enter_segment(v, g_->edges[e].to);
}

void Engine::check_invariants() {
  std::uint64_t occ_total = 0;
  for (SegmentId s = 0; s < seg_state_.size(); ++s) {
    const SegState& st = seg_state_[s];
    if (st.occupancy > st.capacity) ++violations_.storage;
    std::size_t held = st.running.size();
    for (int k = 0; k < st.n_queues; ++k) held += st.queues[k].size();
    if (static_cast<std::size_t>(st.occupancy) != held) ++violations_.conservation;
    occ_total += static_cast<std::uint64_t>(st.occupancy);
  }
  if (occ_total != in_network_ ||
      vehicles_.size() != completed_ + in_network_ + pending_total_)
    ++violations_.conservation;
}

}  // namespace gridflow
