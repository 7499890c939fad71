#pragma once

// Instance generators.

#include <set>

#include "silbot/model.hpp"
#include "silbot/scheduler.hpp"

namespace silbot {

enum class Shape : std::uint8_t { hex, vline, hline, random };

inline std::optional<Shape> parse_shape(std::string_view s) {
  if (s == "hex") return Shape::hex;
  if (s == "vline") return Shape::vline;
  if (s == "hline") return Shape::hline;
  if (s == "random") return Shape::random;
  return std::nullopt;
}

// The first n nodes of the spiral around (0,0): the centre, then ring 1, ring
// 2, ... each ring walked from its East corner counter-clockwise.
inline std::vector<Node> hex_spiral(std::size_t n) {
  std::vector<Node> out;
  if (n == 0) return out;
  out.push_back({0, 0});
  // Walking directions along the sides of a ring that starts at k*E.
  constexpr std::array<Direction, 6> sides = {Direction::NW, Direction::W, Direction::SW,
                                              Direction::SE, Direction::E, Direction::NE};
  for (Coord k = 1; out.size() < n; ++k) {
    Node v{k, 0};
    for (Direction side : sides) {
      for (Coord step = 0; step < k && out.size() < n; ++step) {
        out.push_back(v);
        v = neighbor(v, side);
      }
    }
  }
  return out;
}

// Grows a connected set from (0,0) by adding a uniformly drawn empty
// neighbour (drawn from the sorted frontier) until n nodes are placed.
inline std::vector<Node> random_blob(std::size_t n, std::uint64_t seed) {
  std::vector<Node> out;
  if (n == 0) return out;
  SplitMix64 rng(seed);
  std::set<Node> taken{{0, 0}};
  std::set<Node> frontier;
  for (Direction d : kDirections) frontier.insert(neighbor({0, 0}, d));
  out.push_back({0, 0});
  while (out.size() < n) {
    auto it = frontier.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(rng.below(frontier.size())));
    const Node v = *it;
    frontier.erase(it);
    taken.insert(v);
    out.push_back(v);
    for (Direction d : kDirections) {
      const Node u = neighbor(v, d);
      if (!taken.contains(u)) frontier.insert(u);
    }
  }
  return out;
}

inline Configuration generate(Shape shape, std::size_t n, std::uint64_t seed = 0) {
  if (n < 1) throw std::invalid_argument("need at least one particle");
  std::vector<Node> nodes;
  switch (shape) {
    case Shape::hex: nodes = hex_spiral(n); break;
    case Shape::random: nodes = random_blob(n, seed); break;
    case Shape::vline:
      for (std::size_t i = 0; i < n; ++i) nodes.push_back({0, static_cast<Coord>(i)});
      break;
    case Shape::hline:
      for (std::size_t i = 0; i < n; ++i) nodes.push_back({static_cast<Coord>(i), 0});
      break;
  }
  return Configuration::contracted_from(nodes);
}

}  // namespace silbot
