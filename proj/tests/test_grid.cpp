#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "gridflow/grid.hpp"

using namespace gridflow;

namespace {

GridSpec paper_spec() { return GridSpec{}; }  // defaults are the 5x5 / 12 km layout

GridSpec small_spec(int rows, int cols) {
  GridSpec s;
  s.rows = rows;
  s.cols = cols;
  s.span_m = 2000.0 * (std::max(rows, cols) + 1);
  s.highway_margin_m = 2000.0;
  return s;
}

}  // namespace

TEST_CASE("5x5 grid matches the published layout counts") {
  RoadGraph g = build_grid(paper_spec());
  CHECK(g.intersections.size() == 25);
  CHECK(g.sources.size() == 20);
  CHECK(g.sinks.size() == 20);
  CHECK(g.segments.size() == 120);
  CHECK(g.edges.size() == 300);
}

TEST_CASE("2x2 grid: every incoming approach has exactly 3 turn edges") {
  GridSpec spec = small_spec(2, 2);
  RoadGraph g = build_grid(spec);
  CHECK(g.intersections.size() == 4);
  CHECK(g.sources.size() == 8);
  CHECK(g.sinks.size() == 8);
  for (const Intersection& x : g.intersections) {
    for (SegmentId in : x.incoming) {
      int n = 0;
      for (const TurnEdge& e : g.edges)
        if (e.from == in && e.intersection == x.id) ++n;
      CHECK(n == 3);
    }
  }
}

TEST_CASE("generator output is defect free and structurally sound") {
  for (auto [r, c] : {std::pair{2, 2}, {2, 3}, {3, 2}, {3, 3}, {5, 5}}) {
    GridSpec spec = small_spec(r, c);
    if (r == 5) spec = paper_spec();
    RoadGraph g = build_grid(spec);
    CAPTURE(r);
    CAPTURE(c);
    CHECK(validate_graph(g).empty());
    CHECK(g.sources.size() == static_cast<std::size_t>(2 * (r + c)));
    CHECK(g.sinks.size() == g.sources.size());

    for (const RoadSegment& s : g.segments) {
      CHECK(s.length_m > 0.0);
      double geo = std::hypot(s.end.x - s.start.x, s.end.y - s.start.y);
      CHECK(s.length_m == doctest::Approx(geo));
    }
    // no duplicate edges, no U-turns by from/to heading
    std::set<std::pair<SegmentId, SegmentId>> seen;
    for (const TurnEdge& e : g.edges) {
      CHECK(e.from != e.to);
      CHECK(seen.insert({e.from, e.to}).second);
    }
  }
}

TEST_CASE("build_grid is a pure function of its GridSpec argument") {
  RoadGraph a = build_grid(paper_spec());
  RoadGraph b = build_grid(paper_spec());
  REQUIRE(a.segments.size() == b.segments.size());
  for (std::size_t i = 0; i < a.segments.size(); ++i) {
    CHECK(a.segments[i].name == b.segments[i].name);
    CHECK(a.segments[i].length_m == b.segments[i].length_m);
  }
  REQUIRE(a.edges.size() == b.edges.size());
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    CHECK(a.edges[i].from == b.edges[i].from);
    CHECK(a.edges[i].to == b.edges[i].to);
  }
}

TEST_CASE("invalid specs are rejected with the violated invariant") {
  GridSpec s;
  s.rows = 1;
  CHECK_THROWS_AS(build_grid(s), ConfigError);
  s = GridSpec{};
  s.highway_margin_m = 7000.0;  // 2*margin > span
  CHECK_THROWS_AS(build_grid(s), ConfigError);
  s = GridSpec{};
  s.lanes_per_direction = 0;
  CHECK_THROWS_AS(build_grid(s), ConfigError);
}

TEST_CASE("validate_graph flags constructed violations") {
  RoadGraph g = build_grid(small_spec(2, 2));

  SUBCASE("unreachable sink") {
    SegmentId sink = g.sinks[0];
    g.edges.erase(std::remove_if(g.edges.begin(), g.edges.end(),
                                 [&](const TurnEdge& e) { return e.to == sink; }),
                  g.edges.end());
    g.finalize();
    auto defects = validate_graph(g);
    CHECK(std::any_of(defects.begin(), defects.end(), [](const Defect& d) {
      return d.kind == DefectKind::UnreachableSink;
    }));
  }

  SUBCASE("injected U-turn edge") {
    // find two segments meeting at an intersection with opposite headings
    const TurnEdge& base = g.edges.front();
    const Intersection& x = g.intersections[base.intersection];
    SegmentId uturn_to = kInvalidSegment;
    Heading in_heading = g.segments[base.from].heading;
    for (SegmentId out : x.outgoing) {
      Heading h = g.segments[out].heading;
      bool opposite = (in_heading == Heading::East && h == Heading::West) ||
                      (in_heading == Heading::West && h == Heading::East) ||
                      (in_heading == Heading::North && h == Heading::South) ||
                      (in_heading == Heading::South && h == Heading::North);
      if (opposite) uturn_to = out;
    }
    REQUIRE(uturn_to != kInvalidSegment);
    TurnEdge uturn;
    uturn.id = static_cast<EdgeId>(g.edges.size());
    uturn.from = base.from;
    uturn.to = uturn_to;
    uturn.intersection = base.intersection;
    uturn.movement = Movement::Through;
    g.edges.push_back(uturn);
    g.finalize();
    auto defects = validate_graph(g);
    CHECK(std::count_if(defects.begin(), defects.end(), [](const Defect& d) {
            return d.kind == DefectKind::UTurnEdge;
          }) == 1);
  }
}

TEST_CASE("source and sink labels cover S1..Sn / D1..Dn") {
  RoadGraph g = build_grid(paper_spec());
  CHECK(g.source_label(g.sources[0]) == "S1");
  CHECK(g.source_label(g.sources[19]) == "S20");
  CHECK(g.sink_label(g.sinks[7]) == "D8");
  CHECK(g.source_label(g.sinks[0]).empty());
}
