#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gridflow {

using SegmentId = std::uint32_t;
using EdgeId = std::uint32_t;
using IntersectionId = std::uint32_t;
using VehicleId = std::uint32_t;

inline constexpr SegmentId kInvalidSegment = static_cast<SegmentId>(-1);
inline constexpr EdgeId kInvalidEdge = static_cast<EdgeId>(-1);

// Configuration / input validation failures (CLI exit code 1).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller violated a documented precondition.
struct ContractError : std::runtime_error {
  explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// No path between the requested segments.
struct RoutingError : std::runtime_error {
  explicit RoutingError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gridflow
