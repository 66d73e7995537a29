#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridflow/common.hpp"

namespace gridflow {

// Cardinal travel direction of a carriageway. The map uses x growing east
// and y growing north.
enum class Heading : std::uint8_t { East, West, North, South };

enum class Movement : std::uint8_t { Through, Left, Right };

enum class SegmentKind : std::uint8_t { Interior, SourceStub, SinkStub };

// Border of the simulated square an entry/exit stub touches.
enum class BorderSide : std::uint8_t { None, West, East, South, North };

const char* to_string(Heading h);
const char* to_string(Movement m);
const char* to_string(SegmentKind k);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct GridSpec {
  int rows = 5;  // east-west highways
  int cols = 5;  // north-south highways
  int lanes_per_direction = 5;
  double span_m = 12000.0;
  double highway_margin_m = 2000.0;
  double free_flow_speed_mps = 50.0 / 3.0;  // 60 km/h

  // Throws ConfigError naming the violated invariant.
  void validate() const;
  double row_spacing_m() const { return (span_m - 2.0 * highway_margin_m) / (rows - 1); }
  double col_spacing_m() const { return (span_m - 2.0 * highway_margin_m) / (cols - 1); }
};

struct RoadSegment {
  SegmentId id = kInvalidSegment;
  std::string name;
  double length_m = 0.0;
  int lanes = 1;
  double free_flow_speed_mps = 0.0;
  SegmentKind kind = SegmentKind::Interior;
  Heading heading = Heading::East;
  BorderSide border = BorderSide::None;  // set for stubs only
  Point start;
  Point end;

  double free_flow_s() const { return length_m / free_flow_speed_mps; }
};

struct TurnEdge {
  EdgeId id = kInvalidEdge;
  SegmentId from = kInvalidSegment;
  SegmentId to = kInvalidSegment;
  IntersectionId intersection = 0;
  Movement movement = Movement::Through;
};

struct Intersection {
  IntersectionId id = 0;
  std::string name;
  Point pos;
  std::vector<SegmentId> incoming;
  std::vector<SegmentId> outgoing;
};

enum class DefectKind : std::uint8_t {
  UnreachableSink,
  DanglingSegment,
  UTurnEdge,
  GeometryMismatch,
};

struct Defect {
  DefectKind kind;
  std::string detail;
};

struct RoadGraph {
  GridSpec spec;
  std::vector<RoadSegment> segments;
  std::vector<TurnEdge> edges;
  std::vector<Intersection> intersections;
  std::vector<SegmentId> sources;  // S1..Sn order
  std::vector<SegmentId> sinks;    // D1..Dn order

  // Derived, rebuilt by finalize(): per-segment outgoing/incoming edge ids,
  // outgoing sorted by destination segment id.
  std::vector<std::vector<EdgeId>> out_edges;
  std::vector<std::vector<EdgeId>> in_edges;

  void finalize();

  const RoadSegment& segment(SegmentId s) const { return segments.at(s); }
  const TurnEdge& edge(EdgeId e) const { return edges.at(e); }
  std::optional<EdgeId> find_edge(SegmentId from, SegmentId to) const;

  // 1-based labels matching the map ("S3", "D17"); empty for non-stubs.
  std::string source_label(SegmentId s) const;
  std::string sink_label(SegmentId s) const;
  std::optional<int> source_index(SegmentId s) const;  // 0-based
  std::optional<int> sink_index(SegmentId s) const;
};

// Generates the Manhattan-style network: one directed carriageway per
// heading per highway, split into segments at every intersection, with a
// source stub at the entering border and a sink stub at the leaving border.
RoadGraph build_grid(const GridSpec& spec);

// Structural check; an empty result means every graph invariant holds.
std::vector<Defect> validate_graph(const RoadGraph& g);

}  // namespace gridflow
