#pragma once

// Configurations of particles and the local view predicates.

#include <array>
#include <map>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "silbot/grid.hpp"

namespace silbot {

struct ParticleState {
  std::optional<Direction> expansion;  // empty when contracted

  static constexpr ParticleState contracted() { return {}; }
  static constexpr ParticleState expanded(Direction d) { return {d}; }

  constexpr bool is_contracted() const { return !expansion.has_value(); }
  constexpr bool is_expanded() const { return expansion.has_value(); }

  friend constexpr bool operator==(const ParticleState&, const ParticleState&) = default;
};

inline std::string to_string(const ParticleState& s) {
  return s.expansion ? std::string(to_string(*s.expansion)) : std::string("C");
}

// Body node -> state. The map enforces one particle per node and gives a
// deterministic iteration order.
class Configuration {
 public:
  using Map = std::map<Node, ParticleState>;

  Configuration() = default;
  Configuration(std::initializer_list<Map::value_type> init) : particles_(init) {}
  explicit Configuration(Map particles) : particles_(std::move(particles)) {}

  static Configuration contracted(std::initializer_list<Node> nodes) {
    Configuration c;
    for (Node v : nodes) c.place(v, ParticleState::contracted());
    return c;
  }

  template <typename Range>
  static Configuration contracted_from(const Range& nodes) {
    Configuration c;
    for (const Node& v : nodes) c.place(v, ParticleState::contracted());
    return c;
  }

  std::size_t size() const { return particles_.size(); }
  bool empty() const { return particles_.empty(); }

  bool contains(Node v) const { return particles_.find(v) != particles_.end(); }

  std::optional<ParticleState> state_at(Node v) const {
    auto it = particles_.find(v);
    if (it == particles_.end()) return std::nullopt;
    return it->second;
  }

  // Returns false if v already holds a particle.
  bool place(Node v, ParticleState s) { return particles_.emplace(v, s).second; }
  void set_state(Node v, ParticleState s) { particles_.at(v) = s; }
  void remove(Node v) { particles_.erase(v); }

  auto begin() const { return particles_.begin(); }
  auto end() const { return particles_.end(); }

  std::vector<Node> bodies() const {
    std::vector<Node> out;
    out.reserve(particles_.size());
    for (const auto& [v, s] : particles_) out.push_back(v);
    return out;
  }

  Configuration translated(Node delta) const {
    Configuration c;
    for (const auto& [v, s] : particles_) c.place(v + delta, s);
    return c;
  }

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  Map particles_;
};

inline bool occupied(const Configuration& c, Node v) { return c.contains(v); }

inline bool pointed(const Configuration& c, Node v) {
  for (Direction d : kDirections) {
    const Node u = neighbor(v, d);
    if (auto s = c.state_at(u); s && s->expansion == opposite(d)) return true;
  }
  return false;
}

inline bool semi_occupied(const Configuration& c, Node u) {
  return !occupied(c, u) && pointed(c, u);
}

inline bool upper(const Configuration& c, Node v) {
  for (int k : kUpperPositions) {
    if (occupied(c, two_hop_position(v, k))) return true;
  }
  return false;
}

inline bool lower(const Configuration& c, Node v) {
  for (int k : kLowerPositions) {
    if (occupied(c, two_hop_position(v, k))) return true;
  }
  return false;
}

inline bool near(const Configuration& c, Node v) {
  for (Direction d : kDirections) {
    if (semi_occupied(c, neighbor(v, d))) return true;
  }
  return false;
}

// Everything a particle at `center` can observe: occupancy and expansion of
// the centre and of the 18 enumerated positions. Predicates evaluated on a
// View cannot look further than two hops.
class View {
 public:
  struct Cell {
    bool occupied = false;
    std::optional<Direction> expansion;
  };

  static View capture(const Configuration& c, Node center) {
    View view;
    view.center_ = center;
    for (int k = 0; k <= kTwoHopPositions; ++k) {
      const Node v = center + kTwoHopOffsets[static_cast<std::size_t>(k)];
      if (auto s = c.state_at(v)) {
        view.cells_[static_cast<std::size_t>(k)] = Cell{true, s->expansion};
      }
    }
    return view;
  }

  Node center() const { return center_; }

  const Cell& at_position(int k) const { return cells_.at(static_cast<std::size_t>(k)); }

  // Cell at a relative offset; throws if the offset is outside the view.
  const Cell& at(Node rel) const {
    auto k = position_of(rel);
    if (!k) throw std::out_of_range("offset outside the two-hop view");
    return at_position(*k);
  }

  bool occupied(Node rel) const { return at(rel).occupied; }

  // Pointed at a relative offset within one hop of the centre.
  bool pointed(Node rel) const {
    for (Direction d : kDirections) {
      const Node u = rel + offset(d);
      const Cell& cell = at(u);
      if (cell.occupied && cell.expansion == opposite(d)) return true;
    }
    return false;
  }

  bool upper() const {
    for (int k : kUpperPositions) {
      if (at_position(k).occupied) return true;
    }
    return false;
  }

  bool lower() const {
    for (int k : kLowerPositions) {
      if (at_position(k).occupied) return true;
    }
    return false;
  }

  bool pointed() const { return pointed(Node{0, 0}); }

  bool near() const {
    for (Direction d : kDirections) {
      const Node u = offset(d);
      if (!occupied(u) && pointed(u)) return true;
    }
    return false;
  }

 private:
  Node center_{};
  std::array<Cell, kTwoHopPositions + 1> cells_{};
};

struct Predicates {
  bool upper = false;
  bool lower = false;
  bool pointed = false;
  bool near = false;

  friend bool operator==(const Predicates&, const Predicates&) = default;
};

inline Predicates predicates(const View& view) {
  return {view.upper(), view.lower(), view.pointed(), view.near()};
}

inline Predicates predicates(const Configuration& c, Node v) {
  return predicates(View::capture(c, v));
}

template <typename Range>
bool nodes_connected(const Range& nodes) {
  std::unordered_set<Node, NodeHash> pending(std::begin(nodes), std::end(nodes));
  if (pending.empty()) return false;
  std::vector<Node> stack{*pending.begin()};
  pending.erase(pending.begin());
  while (!stack.empty()) {
    const Node v = stack.back();
    stack.pop_back();
    for (Direction d : kDirections) {
      auto it = pending.find(neighbor(v, d));
      if (it != pending.end()) {
        stack.push_back(*it);
        pending.erase(it);
      }
    }
  }
  return pending.empty();
}

inline bool is_connected(const Configuration& c) {
  if (c.empty()) throw std::invalid_argument("connectivity of an empty configuration");
  return nodes_connected(c.bodies());
}

inline bool all_contracted(const Configuration& c) {
  for (const auto& [v, s] : c) {
    if (s.is_expanded()) return false;
  }
  return true;
}

inline bool is_initial(const Configuration& c) {
  return !c.empty() && all_contracted(c) && is_connected(c);
}

// `floor` is the floor row of the run's initial configuration.
inline bool is_final(const Configuration& c, Coord floor) {
  if (!is_initial(c)) return false;
  for (const auto& [v, s] : c) {
    if (v.r != floor) return false;
  }
  return true;
}

inline bool is_final(const Configuration& c) {
  return !c.empty() && is_final(c, floor_row(c.bodies()));
}

enum class KeyMode { absolute, translated };

// Sorted "q,r[,DIR]" entries separated by spaces. Equal keys under a mode
// mean equal configurations under that mode.
using ConfigKey = std::string;

inline ConfigKey canonical_key(const Configuration& c, KeyMode mode = KeyMode::absolute) {
  Node shift{0, 0};
  if (mode == KeyMode::translated && !c.empty()) {
    const BoundingBox box = bounding_box(c.bodies());
    shift = Node{-box.q_min, -box.r_min};
  }
  std::string out;
  out.reserve(c.size() * 8);
  bool first = true;
  for (const auto& [v, s] : c) {
    if (!first) out.push_back(' ');
    first = false;
    const Node w = v + shift;
    out += std::to_string(w.q);
    out.push_back(',');
    out += std::to_string(w.r);
    if (s.expansion) {
      out.push_back(',');
      out += to_string(*s.expansion);
    }
  }
  return out;
}

// Inverse of canonical_key for absolute keys.
inline Configuration configuration_from_key(std::string_view key) {
  Configuration c;
  std::istringstream in{std::string(key)};
  std::string entry;
  while (in >> entry) {
    Node v;
    ParticleState s;
    const auto c1 = entry.find(',');
    if (c1 == std::string::npos) throw std::invalid_argument("malformed key entry: " + entry);
    const auto c2 = entry.find(',', c1 + 1);
    try {
      v.q = std::stoll(entry.substr(0, c1));
      v.r = std::stoll(entry.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed key entry: " + entry);
    }
    if (c2 != std::string::npos) {
      auto d = parse_direction(entry.substr(c2 + 1));
      if (!d) throw std::invalid_argument("malformed key entry: " + entry);
      s = ParticleState::expanded(*d);
    }
    if (!c.place(v, s)) throw std::invalid_argument("duplicate node in key: " + entry);
  }
  return c;
}

// Structural violations of a configuration; empty when valid.
inline std::vector<std::string> validate(const Configuration& c) {
  std::vector<std::string> violations;
  if (c.empty()) violations.emplace_back("configuration has no particles");
  for (const auto& [v, s] : c) {
    if (!s.expansion) continue;
    const Node u = neighbor(v, *s.expansion);
    auto other = c.state_at(u);
    // An edge is shared only when the far endpoint expands straight back.
    if (other && other->expansion == opposite(*s.expansion) && v < u) {
      std::ostringstream msg;
      msg << "edge " << v << '-' << u << " claimed by two expanded particles";
      violations.push_back(msg.str());
    }
  }
  return violations;
}

}  // namespace silbot
