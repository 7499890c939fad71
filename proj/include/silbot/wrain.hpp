#pragma once

// The line-formation rule: a contracted particle expands East when pushed,
// South-East when nothing is above-west of it and something is below-east,
// and otherwise stays put. Nothing happens while an adjacent node is
// semi-occupied.

#include <stdexcept>

#include "silbot/model.hpp"

namespace silbot {

enum class Action : std::uint8_t { noop, expand_e, expand_se };

constexpr std::optional<Direction> direction_of(Action a) {
  switch (a) {
    case Action::expand_e: return Direction::E;
    case Action::expand_se: return Direction::SE;
    case Action::noop: break;
  }
  return std::nullopt;
}

inline std::string_view to_string(Action a) {
  switch (a) {
    case Action::noop: return "noop";
    case Action::expand_e: return "expand_E";
    case Action::expand_se: return "expand_SE";
  }
  return "?";
}

// The view's centre must hold a contracted particle.
inline Action decide(const View& view) {
  const View::Cell& self = view.at_position(0);
  if (!self.occupied || self.expansion) {
    throw std::logic_error("decide requires a contracted particle at the view centre");
  }
  if (view.near()) return Action::noop;
  if (view.pointed()) return Action::expand_e;
  if (!view.upper() && view.lower()) return Action::expand_se;
  return Action::noop;
}

inline Action decide(const Configuration& c, Node v) { return decide(View::capture(c, v)); }

// Whether activating the particle at v would change the configuration
// (absent conflicts).
inline bool enabled(const Configuration& c, Node v) {
  auto s = c.state_at(v);
  if (!s) throw std::invalid_argument("no particle at the queried node");
  if (s->expansion) return !occupied(c, neighbor(v, *s->expansion));
  return decide(c, v) != Action::noop;
}

}  // namespace silbot
