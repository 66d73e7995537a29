#include "gridflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>

namespace gridflow {

const char* to_string(Heading h) {
  switch (h) {
    case Heading::East: return "EB";
    case Heading::West: return "WB";
    case Heading::North: return "NB";
    case Heading::South: return "SB";
  }
  return "?";
}

const char* to_string(Movement m) {
  switch (m) {
    case Movement::Through: return "through";
    case Movement::Left: return "left";
    case Movement::Right: return "right";
  }
  return "?";
}

const char* to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::Interior: return "interior";
    case SegmentKind::SourceStub: return "source_stub";
    case SegmentKind::SinkStub: return "sink_stub";
  }
  return "?";
}

void GridSpec::validate() const {
  if (rows < 2) throw ConfigError("grid.rows must be >= 2");
  if (cols < 2) throw ConfigError("grid.cols must be >= 2");
  if (lanes_per_direction < 1) throw ConfigError("grid.lanes_per_direction must be >= 1");
  if (span_m <= 0.0) throw ConfigError("grid.span_m must be > 0");
  if (free_flow_speed_mps <= 0.0) throw ConfigError("grid.free_flow_speed_mps must be > 0");
  if (highway_margin_m <= 0.0) throw ConfigError("grid.highway_margin_m must be > 0");
  if (2.0 * highway_margin_m >= span_m)
    throw ConfigError("grid.highway_margin_m leaves no room for interior spacing: "
                      "2*margin must be < span_m");
}

namespace {

struct DirVec {
  double x, y;
};

DirVec heading_vec(Heading h) {
  switch (h) {
    case Heading::East: return {1.0, 0.0};
    case Heading::West: return {-1.0, 0.0};
    case Heading::North: return {0.0, 1.0};
    case Heading::South: return {0.0, -1.0};
  }
  return {0.0, 0.0};
}

Movement classify_turn(Heading in, Heading out) {
  DirVec a = heading_vec(in), b = heading_vec(out);
  double cross = a.x * b.y - a.y * b.x;
  if (cross > 0.0) return Movement::Left;
  if (cross < 0.0) return Movement::Right;
  return Movement::Through;
}

bool opposite(Heading a, Heading b) {
  DirVec u = heading_vec(a), v = heading_vec(b);
  return u.x * v.x + u.y * v.y < 0.0;
}

struct Carriageway {
  Heading heading;
  // segments in travel order: [source stub, interiors..., sink stub]
  std::vector<SegmentId> segs;
  // intersections passed, in travel order; intersection k sits between
  // segs[k] and segs[k+1]
  std::vector<IntersectionId> xings;
};

}  // namespace

RoadGraph build_grid(const GridSpec& spec) {
  spec.validate();
  RoadGraph g;
  g.spec = spec;

  const double sx = spec.col_spacing_m();
  const double sy = spec.row_spacing_m();
  const double m = spec.highway_margin_m;

  g.intersections.resize(static_cast<std::size_t>(spec.rows) * spec.cols);
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      Intersection& x = g.intersections[static_cast<std::size_t>(r) * spec.cols + c];
      x.id = static_cast<IntersectionId>(r * spec.cols + c);
      x.pos = {m + c * sx, m + r * sy};
      std::ostringstream os;
      os << "I" << r << "_" << c;
      x.name = os.str();
    }
  }

  auto xing_at = [&](int r, int c) -> IntersectionId {
    return static_cast<IntersectionId>(r * spec.cols + c);
  };

  std::vector<Carriageway> ways;

  auto add_segment = [&](const std::string& name, Point a, Point b, SegmentKind kind,
                         Heading h, BorderSide border) -> SegmentId {
    RoadSegment s;
    s.id = static_cast<SegmentId>(g.segments.size());
    s.name = name;
    s.start = a;
    s.end = b;
    s.length_m = std::hypot(b.x - a.x, b.y - a.y);
    s.lanes = spec.lanes_per_direction;
    s.free_flow_speed_mps = spec.free_flow_speed_mps;
    s.kind = kind;
    s.heading = h;
    s.border = border;
    g.segments.push_back(std::move(s));
    return g.segments.back().id;
  };

  auto build_way = [&](Heading h, int index) {
    Carriageway w;
    w.heading = h;
    const bool horizontal = (h == Heading::East || h == Heading::West);
    const int ncuts = horizontal ? spec.cols : spec.rows;
    const double fixed = m + index * (horizontal ? sy : sx);

    // Cut coordinates along travel direction, including both borders.
    std::vector<double> cuts;
    cuts.push_back(0.0);
    for (int k = 0; k < ncuts; ++k) cuts.push_back(m + k * (horizontal ? sx : sy));
    cuts.push_back(spec.span_m);
    // cuts in travel order
    const bool reversed = (h == Heading::West || h == Heading::South);
    if (reversed) std::reverse(cuts.begin(), cuts.end());

    auto point_at = [&](double along) -> Point {
      return horizontal ? Point{along, fixed} : Point{fixed, along};
    };

    BorderSide entry, exit;
    switch (h) {
      case Heading::East: entry = BorderSide::West; exit = BorderSide::East; break;
      case Heading::West: entry = BorderSide::East; exit = BorderSide::West; break;
      case Heading::North: entry = BorderSide::South; exit = BorderSide::North; break;
      case Heading::South: entry = BorderSide::North; exit = BorderSide::South; break;
    }

    const int nseg = static_cast<int>(cuts.size()) - 1;
    for (int k = 0; k < nseg; ++k) {
      std::ostringstream os;
      os << to_string(h) << index << "_" << k;
      SegmentKind kind = k == 0            ? SegmentKind::SourceStub
                         : k == nseg - 1   ? SegmentKind::SinkStub
                                           : SegmentKind::Interior;
      BorderSide border = k == 0 ? entry : k == nseg - 1 ? exit : BorderSide::None;
      w.segs.push_back(add_segment(os.str(), point_at(cuts[k]), point_at(cuts[k + 1]),
                                   kind, h, border));
    }
    for (int k = 0; k < ncuts; ++k) {
      int pos = reversed ? ncuts - 1 - k : k;
      w.xings.push_back(horizontal ? xing_at(index, pos) : xing_at(pos, index));
    }
    g.sources.push_back(w.segs.front());
    g.sinks.push_back(w.segs.back());
    ways.push_back(std::move(w));
  };

  for (int r = 0; r < spec.rows; ++r) build_way(Heading::East, r);
  for (int r = 0; r < spec.rows; ++r) build_way(Heading::West, r);
  for (int c = 0; c < spec.cols; ++c) build_way(Heading::North, c);
  for (int c = 0; c < spec.cols; ++c) build_way(Heading::South, c);

  // Gather per-intersection approaches, then connect every incoming segment
  // to the three non-U-turn outgoing segments.
  struct Approach {
    SegmentId in, out;
    Heading h;
  };
  std::vector<std::vector<Approach>> approaches(g.intersections.size());
  for (const Carriageway& w : ways) {
    for (std::size_t k = 0; k < w.xings.size(); ++k) {
      approaches[w.xings[k]].push_back({w.segs[k], w.segs[k + 1], w.heading});
    }
  }
  for (std::size_t xi = 0; xi < approaches.size(); ++xi) {
    Intersection& x = g.intersections[xi];
    for (const Approach& a : approaches[xi]) {
      x.incoming.push_back(a.in);
      x.outgoing.push_back(a.out);
    }
    for (const Approach& in : approaches[xi]) {
      for (const Approach& out : approaches[xi]) {
        if (opposite(in.h, out.h)) continue;  // no U-turns
        TurnEdge e;
        e.id = static_cast<EdgeId>(g.edges.size());
        e.from = in.in;
        e.to = out.out;
        e.intersection = x.id;
        e.movement = classify_turn(in.h, out.h);
        g.edges.push_back(e);
      }
    }
  }

  g.finalize();
  return g;
}

void RoadGraph::finalize() {
  out_edges.assign(segments.size(), {});
  in_edges.assign(segments.size(), {});
  for (const TurnEdge& e : edges) {
    out_edges.at(e.from).push_back(e.id);
    in_edges.at(e.to).push_back(e.id);
  }
  for (auto& v : out_edges)
    std::sort(v.begin(), v.end(),
              [&](EdgeId a, EdgeId b) { return edges[a].to < edges[b].to; });
}

std::optional<EdgeId> RoadGraph::find_edge(SegmentId from, SegmentId to) const {
  for (EdgeId e : out_edges.at(from))
    if (edges[e].to == to) return e;
  return std::nullopt;
}

std::optional<int> RoadGraph::source_index(SegmentId s) const {
  auto it = std::find(sources.begin(), sources.end(), s);
  if (it == sources.end()) return std::nullopt;
  return static_cast<int>(it - sources.begin());
}

std::optional<int> RoadGraph::sink_index(SegmentId s) const {
  auto it = std::find(sinks.begin(), sinks.end(), s);
  if (it == sinks.end()) return std::nullopt;
  return static_cast<int>(it - sinks.begin());
}

std::string RoadGraph::source_label(SegmentId s) const {
  auto i = source_index(s);
  return i ? "S" + std::to_string(*i + 1) : std::string{};
}

std::string RoadGraph::sink_label(SegmentId s) const {
  auto i = sink_index(s);
  return i ? "D" + std::to_string(*i + 1) : std::string{};
}

std::vector<Defect> validate_graph(const RoadGraph& g) {
  std::vector<Defect> defects;

  for (const RoadSegment& s : g.segments) {
    if (s.kind != SegmentKind::SinkStub && g.out_edges[s.id].empty())
      defects.push_back({DefectKind::DanglingSegment,
                         "segment " + s.name + " has no outgoing turn edge"});
    if (s.kind != SegmentKind::SourceStub && g.in_edges[s.id].empty())
      defects.push_back({DefectKind::DanglingSegment,
                         "segment " + s.name + " has no incoming turn edge"});
    double geo = std::hypot(s.end.x - s.start.x, s.end.y - s.start.y);
    if (std::abs(geo - s.length_m) > 1e-6)
      defects.push_back({DefectKind::GeometryMismatch,
                         "segment " + s.name + " length_m disagrees with geometry"});
  }

  for (const TurnEdge& e : g.edges) {
    const RoadSegment& a = g.segments[e.from];
    const RoadSegment& b = g.segments[e.to];
    if (opposite(a.heading, b.heading))
      defects.push_back({DefectKind::UTurnEdge,
                         "edge " + a.name + " -> " + b.name + " is a U-turn"});
  }

  // Reachability: every sink from every source.
  for (SegmentId sink : g.sinks) {
    // reverse BFS from the sink
    std::vector<char> seen(g.segments.size(), 0);
    std::queue<SegmentId> q;
    q.push(sink);
    seen[sink] = 1;
    while (!q.empty()) {
      SegmentId v = q.front();
      q.pop();
      for (EdgeId e : g.in_edges[v]) {
        SegmentId u = g.edges[e].from;
        if (!seen[u]) {
          seen[u] = 1;
          q.push(u);
        }
      }
    }
    int missing = 0;
    for (SegmentId src : g.sources)
      if (!seen[src]) ++missing;
    if (missing > 0)
      defects.push_back({DefectKind::UnreachableSink,
                         "sink " + g.segments[sink].name + " unreachable from " +
                             std::to_string(missing) + " source(s)"});
  }

  return defects;
}

}  // namespace gridflow
