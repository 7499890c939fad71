#pragma once

// Triangular-lattice geometry in axial coordinates.
//
// q runs West -> East, r runs SouthWest -> NorthEast. With this embedding the
// bounding parallelogram (sides parallel to W-E and SW-NE) is an axis-aligned
// box in (q, r), and the floor is the row r = r_min.

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace silbot {

using Coord = std::int64_t;

struct Node {
  Coord q = 0;
  Coord r = 0;

  friend constexpr auto operator<=>(const Node&, const Node&) = default;

  friend constexpr Node operator+(Node a, Node b) { return {a.q + b.q, a.r + b.r}; }
  friend constexpr Node operator-(Node a, Node b) { return {a.q - b.q, a.r - b.r}; }

  friend std::ostream& operator<<(std::ostream& os, const Node& v) {
    return os << '(' << v.q << ',' << v.r << ')';
  }
};

struct NodeHash {
  std::size_t operator()(const Node& v) const noexcept {
    auto h = static_cast<std::uint64_t>(v.q) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(v.r) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

enum class Direction : std::uint8_t { E, W, NE, NW, SE, SW };

inline constexpr std::array<Direction, 6> kDirections = {
    Direction::E, Direction::W, Direction::NE, Direction::NW, Direction::SE, Direction::SW};

constexpr Node offset(Direction d) {
  switch (d) {
    case Direction::E: return {1, 0};
    case Direction::W: return {-1, 0};
    case Direction::NE: return {0, 1};
    case Direction::SW: return {0, -1};
    case Direction::NW: return {-1, 1};
    case Direction::SE: return {1, -1};
  }
  return {0, 0};
}

constexpr Direction opposite(Direction d) {
  switch (d) {
    case Direction::E: return Direction::W;
    case Direction::W: return Direction::E;
    case Direction::NE: return Direction::SW;
    case Direction::SW: return Direction::NE;
    case Direction::NW: return Direction::SE;
    case Direction::SE: return Direction::NW;
  }
  return d;
}

constexpr Node neighbor(Node v, Direction d) { return v + offset(d); }

// Direction from u to an adjacent node v, if they are adjacent.
constexpr std::optional<Direction> direction_between(Node u, Node v) {
  const Node delta = v - u;
  for (Direction d : kDirections) {
    if (offset(d) == delta) return d;
  }
  return std::nullopt;
}

inline std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::E: return "E";
    case Direction::W: return "W";
    case Direction::NE: return "NE";
    case Direction::NW: return "NW";
    case Direction::SE: return "SE";
    case Direction::SW: return "SW";
  }
  return "?";
}

inline std::optional<Direction> parse_direction(std::string_view s) {
  for (Direction d : kDirections) {
    if (to_string(d) == s) return d;
  }
  return std::nullopt;
}

inline std::ostream& operator<<(std::ostream& os, Direction d) { return os << to_string(d); }

// Hop distance on the lattice.
constexpr Coord distance(Node u, Node v) {
  const Coord dq = v.q - u.q;
  const Coord dr = v.r - u.r;
  const auto abs = [](Coord x) { return x < 0 ? -x : x; };
  return (abs(dq) + abs(dr) + abs(dq + dr)) / 2;
}

// The 18 nodes within two hops of a particle, numbered row by row from the
// top (r = +2) down to r = -2, west to east within a row, skipping the centre.
// Index 0 is unused so that position k sits at kTwoHopOffsets[k].
inline constexpr int kTwoHopPositions = 18;
inline constexpr std::array<Node, kTwoHopPositions + 1> kTwoHopOffsets = {{
    {0, 0},
    {-2, 2}, {-1, 2}, {0, 2},                 // 1..3
    {-2, 1}, {-1, 1}, {0, 1}, {1, 1},         // 4..7
    {-2, 0}, {-1, 0}, {1, 0}, {2, 0},         // 8..11
    {-1, -1}, {0, -1}, {1, -1}, {2, -1},      // 12..15
    {0, -2}, {1, -2}, {2, -2},                // 16..18
}};

// Upper-west and lower-east trapezoids of the enumerated neighbourhood.
inline constexpr std::array<int, 5> kUpperPositions = {1, 2, 4, 5, 6};
inline constexpr std::array<int, 5> kLowerPositions = {13, 14, 15, 17, 18};

constexpr Node two_hop_offset(int k) {
  if (k < 1 || k > kTwoHopPositions) throw std::out_of_range("two-hop position must be in 1..18");
  return kTwoHopOffsets[static_cast<std::size_t>(k)];
}

constexpr Node two_hop_position(Node v, int k) { return v + two_hop_offset(k); }

// Inverse of two_hop_offset: 0 for the centre, 1..18 for the ring, nullopt
// beyond two hops.
constexpr std::optional<int> position_of(Node rel) {
  for (int k = 0; k <= kTwoHopPositions; ++k) {
    if (kTwoHopOffsets[static_cast<std::size_t>(k)] == rel) return k;
  }
  return std::nullopt;
}

struct BoundingBox {
  Coord q_min = 0;
  Coord q_max = 0;
  Coord r_min = 0;
  Coord r_max = 0;

  friend constexpr bool operator==(const BoundingBox&, const BoundingBox&) = default;

  constexpr Coord we_side() const { return q_max - q_min; }
  constexpr Coord swne_side() const { return r_max - r_min; }

  constexpr bool contains(Node v) const {
    return q_min <= v.q && v.q <= q_max && r_min <= v.r && v.r <= r_max;
  }

  constexpr BoundingBox united(const BoundingBox& o) const {
    return {std::min(q_min, o.q_min), std::max(q_max, o.q_max), std::min(r_min, o.r_min),
            std::max(r_max, o.r_max)};
  }

  constexpr BoundingBox extended(Node v) const {
    return {std::min(q_min, v.q), std::max(q_max, v.q), std::min(r_min, v.r),
            std::max(r_max, v.r)};
  }

  friend std::ostream& operator<<(std::ostream& os, const BoundingBox& b) {
    return os << "[q " << b.q_min << ".." << b.q_max << ", r " << b.r_min << ".." << b.r_max
              << ']';
  }
};

template <typename Range>
BoundingBox bounding_box(const Range& nodes) {
  auto it = std::begin(nodes);
  if (it == std::end(nodes)) throw std::invalid_argument("bounding box of an empty node set");
  const Node first = *it;
  BoundingBox box{first.q, first.q, first.r, first.r};
  for (++it; it != std::end(nodes); ++it) box = box.extended(*it);
  return box;
}

inline BoundingBox bounding_box(std::initializer_list<Node> nodes) {
  return bounding_box(std::span<const Node>(nodes.begin(), nodes.size()));
}

template <typename Range>
Coord floor_row(const Range& nodes) {
  return bounding_box(nodes).r_min;
}

inline Coord floor_row(std::initializer_list<Node> nodes) {
  return bounding_box(nodes).r_min;
}

}  // namespace silbot

template <>
struct std::hash<silbot::Node> {
  std::size_t operator()(const silbot::Node& v) const noexcept { return silbot::NodeHash{}(v); }
};
