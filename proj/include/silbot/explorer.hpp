#pragma once

// Exhaustive exploration of every adversary behaviour from a small initial
// configuration.
//
// States are configurations in absolute coordinates. In serial mode a state's
// successors are all single-particle activations that change it; in
// all_subsets mode they are all nonempty subsets of the enabled particles,
// each combined with every way of settling the conflicts it creates.
//
// Verified along the way: the state graph is acyclic (no configuration repeats
// on any path), every sink is final, the longest path makes at most 2n(n-1)
// moves, and no path visits two translates of one configuration.

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "silbot/engine.hpp"

namespace silbot {

enum class ExploreMode : std::uint8_t { serial, all_subsets };

inline std::string_view to_string(ExploreMode m) {
  return m == ExploreMode::serial ? "serial" : "all_subsets";
}

inline std::optional<ExploreMode> parse_explore_mode(std::string_view s) {
  if (s == "serial") return ExploreMode::serial;
  if (s == "all_subsets") return ExploreMode::all_subsets;
  return std::nullopt;
}

struct ExploreOptions {
  ExploreMode mode = ExploreMode::serial;
  std::uint64_t max_states = 10'000'000;
  std::size_t max_n = 0;  // 0: 5 for serial, 3 for all_subsets

  std::size_t n_bound() const {
    if (max_n) return max_n;
    return mode == ExploreMode::serial ? 5 : 3;
  }
};

struct ExploreResult {
  std::uint64_t states_visited = 0;
  std::uint64_t edges = 0;
  std::set<ConfigKey> terminal_states;
  std::uint64_t max_moves_over_paths = 0;
  std::uint64_t max_path_length = 0;
  bool budget_exhausted = false;
  std::string violation;             // empty when none was found
  std::optional<Trace> counterexample;  // present iff a violation was found

  bool ok() const { return violation.empty() && !budget_exhausted; }
};

class ExploreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Answers conflicts from a fixed list of choices, in order.
class ChoiceAdversary final : public Adversary {
 public:
  explicit ChoiceAdversary(std::vector<ParticleId> picks) : picks_(std::move(picks)) {}
  ParticleId choose(const ConflictGroup&) override { return picks_.at(next_++); }

 private:
  std::vector<ParticleId> picks_;
  std::size_t next_ = 0;
};

struct ExploreEdge {
  std::size_t target = 0;
  std::uint64_t moves = 0;
  std::vector<Node> activated;  // body nodes in the source state
  std::vector<Node> picks;      // body nodes of the conflict winners, in ask order
};

struct ExploreState {
  explicit ExploreState(RunState s) : rep(std::move(s)) {}

  RunState rep;
  std::vector<ExploreEdge> edges;
  enum class Color : std::uint8_t { white, gray, black } color = Color::white;
  std::uint64_t longest_moves = 0;
  std::uint64_t longest_len = 0;
  std::optional<std::size_t> best_edge;  // edge realising longest_moves
};

struct Successor {
  RunState state;
  StepRecord record;
  std::vector<Node> activated;
  std::vector<Node> picks;
};

inline std::vector<Successor> successors(const RunState& s, ExploreMode mode) {
  std::vector<Successor> out;
  const std::vector<ParticleId> enabled = enabled_set(s);
  std::vector<std::vector<ParticleId>> subsets;
  if (mode == ExploreMode::serial) {
    for (ParticleId id : enabled) subsets.push_back({id});
  } else {
    const std::size_t k = enabled.size();
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << k); ++mask) {
      std::vector<ParticleId> sub;
      for (std::size_t i = 0; i < k; ++i) {
        if (mask & (std::uint64_t{1} << i)) sub.push_back(enabled[i]);
      }
      subsets.push_back(std::move(sub));
    }
  }
  for (const auto& sub : subsets) {
    const std::vector<ConflictGroup> groups = pending_conflicts(s, sub);
    std::vector<std::size_t> idx(groups.size(), 0);
    while (true) {
      std::vector<ParticleId> picks;
      for (std::size_t g = 0; g < groups.size(); ++g) picks.push_back(groups[g].members[idx[g]]);
      ChoiceAdversary adv(picks);
      auto [next, rec] = step_round(s, sub, adv);
      if (rec.changed_state()) {
        Successor succ{std::move(next), std::move(rec), {}, {}};
        for (ParticleId id : sub) succ.activated.push_back(s.body[id]);
        for (ParticleId id : picks) succ.picks.push_back(s.body[id]);
        out.push_back(std::move(succ));
      }
      std::size_t g = 0;
      while (g < groups.size() && ++idx[g] == groups[g].members.size()) idx[g++] = 0;
      if (g == groups.size()) break;
    }
  }
  return out;
}

}  // namespace detail

class Explorer {
 public:
  Explorer(Configuration initial, ExploreOptions opts)
      : initial_(std::move(initial)), opts_(opts) {
    if (!is_initial(initial_)) throw ExploreError("explorer needs an initial configuration");
    if (initial_.size() > opts_.n_bound()) {
      throw ExploreError("n = " + std::to_string(initial_.size()) + " exceeds the bound " +
                         std::to_string(opts_.n_bound()) + " for " +
                         std::string(to_string(opts_.mode)) + " mode");
    }
  }

  ExploreResult explore() {
    ExploreResult res;
    const std::size_t n = initial_.size();
    const std::uint64_t move_bound = 2 * static_cast<std::uint64_t>(n) * (n - 1);
    add_state(RunState::start(initial_));

    struct Frame {
      std::size_t state;
      std::size_t next_edge = 0;
    };
    std::vector<Frame> stack;
    auto open = [&](std::size_t idx) {
      states_[idx].color = detail::ExploreState::Color::gray;
      for (auto& succ : detail::successors(states_[idx].rep, opts_.mode)) {
        const ConfigKey key = succ.record.config;
        auto it = index_.find(key);
        std::size_t target;
        if (it == index_.end()) {
          target = add_state(std::move(succ.state));
        } else {
          target = it->second;
        }
        states_[idx].edges.push_back(
            {target, succ.record.moves.size(), std::move(succ.activated), std::move(succ.picks)});
      }
      res.edges += states_[idx].edges.size();
      stack.push_back({idx});
    };

    open(0);
    while (!stack.empty() && res.violation.empty()) {
      if (states_.size() > opts_.max_states) {
        res.budget_exhausted = true;
        break;
      }
      Frame& top = stack.back();
      auto& st = states_[top.state];
      if (top.next_edge < st.edges.size()) {
        const std::size_t e = top.next_edge++;
        const std::size_t t = st.edges[e].target;
        switch (states_[t].color) {
          case detail::ExploreState::Color::white: open(t); break;
          case detail::ExploreState::Color::gray: {
            std::vector<std::pair<std::size_t, std::size_t>> path;
            for (const Frame& f : stack) path.emplace_back(f.state, f.next_edge - 1);
            res.violation = "configuration repeats along an execution";
            res.counterexample = trace_along(path);
            break;
          }
          case detail::ExploreState::Color::black: break;
        }
        continue;
      }
      // All successors finished.
      if (st.edges.empty()) {
        if (!st.rep.reached_final()) {
          std::vector<std::pair<std::size_t, std::size_t>> path;
          for (std::size_t i = 0; i + 1 < stack.size(); ++i) {
            path.emplace_back(stack[i].state, stack[i].next_edge - 1);
          }
          res.violation = "execution stops in a non-final configuration";
          res.counterexample = trace_along(path);
          break;
        }
        res.terminal_states.insert(canonical_key(st.rep.config));
      }
      for (std::size_t e = 0; e < st.edges.size(); ++e) {
        const auto& edge = st.edges[e];
        const auto& tgt = states_[edge.target];
        if (!st.best_edge || edge.moves + tgt.longest_moves > st.longest_moves) {
          st.longest_moves = edge.moves + tgt.longest_moves;
          st.best_edge = e;
        }
        st.longest_len = std::max(st.longest_len, 1 + tgt.longest_len);
      }
      st.color = detail::ExploreState::Color::black;
      stack.pop_back();
    }

    res.states_visited = states_.size();
    if (!res.ok()) return res;

    res.max_moves_over_paths = states_[0].longest_moves;
    res.max_path_length = states_[0].longest_len;
    if (res.max_moves_over_paths > move_bound) {
      std::vector<std::pair<std::size_t, std::size_t>> path;
      for (std::size_t s = 0; states_[s].best_edge;) {
        path.emplace_back(s, *states_[s].best_edge);
        s = states_[s].edges[*states_[s].best_edge].target;
      }
      res.violation = "an execution makes more than 2n(n-1) moves";
      res.counterexample = trace_along(path);
      return res;
    }
    check_translated_repeats(res);
    return res;
  }

  std::size_t state_count() const { return states_.size(); }

 private:
  std::size_t add_state(RunState s) {
    const ConfigKey key = canonical_key(s.config);
    const std::size_t idx = states_.size();
    states_.emplace_back(std::move(s));
    index_.emplace(key, idx);
    return idx;
  }

  // Two translates on one path would need one to be reachable from the other.
  void check_translated_repeats(ExploreResult& res) {
    std::map<ConfigKey, std::vector<std::size_t>> by_shape;
    for (std::size_t i = 0; i < states_.size(); ++i) {
      by_shape[canonical_key(states_[i].rep.config, KeyMode::translated)].push_back(i);
    }
    for (const auto& [shape, members] : by_shape) {
      if (members.size() < 2) continue;
      for (std::size_t from : members) {
        std::vector<std::optional<std::pair<std::size_t, std::size_t>>> parent(states_.size());
        std::vector<bool> seen(states_.size(), false);
        std::vector<std::size_t> queue{from};
        seen[from] = true;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
          const std::size_t s = queue[qi];
          for (std::size_t e = 0; e < states_[s].edges.size(); ++e) {
            const std::size_t t = states_[s].edges[e].target;
            if (seen[t]) continue;
            seen[t] = true;
            parent[t] = {s, e};
            queue.push_back(t);
          }
        }
        for (std::size_t to : members) {
          if (to == from || !seen[to]) continue;
          std::vector<std::pair<std::size_t, std::size_t>> tail;
          for (std::size_t s = to; s != from; s = parent[s]->first) tail.push_back(*parent[s]);
          std::reverse(tail.begin(), tail.end());
          auto path = path_to(from);
          path.insert(path.end(), tail.begin(), tail.end());
          res.violation = "a configuration repeats translated along an execution";
          res.counterexample = trace_along(path);
          return;
        }
      }
    }
  }

  // Some path from the root to `target`, as (state, edge) hops.
  std::vector<std::pair<std::size_t, std::size_t>> path_to(std::size_t target) const {
    std::vector<std::optional<std::pair<std::size_t, std::size_t>>> parent(states_.size());
    std::vector<bool> seen(states_.size(), false);
    std::vector<std::size_t> queue{0};
    seen[0] = true;
    for (std::size_t qi = 0; qi < queue.size() && !seen[target]; ++qi) {
      const std::size_t s = queue[qi];
      for (std::size_t e = 0; e < states_[s].edges.size(); ++e) {
        const std::size_t t = states_[s].edges[e].target;
        if (seen[t]) continue;
        seen[t] = true;
        parent[t] = {s, e};
        queue.push_back(t);
      }
    }
    std::vector<std::pair<std::size_t, std::size_t>> path;
    for (std::size_t s = target; s != 0; s = parent[s]->first) path.push_back(*parent[s]);
    std::reverse(path.begin(), path.end());
    return path;
  }

  // Re-executes a path of (state, edge) hops from the initial configuration.
  Trace trace_along(const std::vector<std::pair<std::size_t, std::size_t>>& path) const {
    Trace trace;
    trace.initial = initial_;
    trace.scheduler = "explore:" + std::string(to_string(opts_.mode));
    trace.adversary = "explore";
    RunState s = RunState::start(initial_);
    trace.floor = s.floor;
    for (const auto& [state, e] : path) {
      const detail::ExploreEdge& edge = states_[state].edges[e];
      std::vector<ParticleId> act, picks;
      for (Node v : edge.activated) act.push_back(*s.id_at(v));
      for (Node v : edge.picks) picks.push_back(*s.id_at(v));
      detail::ChoiceAdversary adv(picks);
      auto [next, rec] = step_round(s, act, adv);
      s = std::move(next);
      trace.records.push_back(std::move(rec));
    }
    trace.summary = {s.step_count, s.move_count, s.expansion_count, s.union_bbox,
                     s.reached_final() ? RunStatus::final : RunStatus::incomplete,
                     "explorer counterexample"};
    return trace;
  }

  Configuration initial_;
  ExploreOptions opts_;
  std::vector<detail::ExploreState> states_;
  std::unordered_map<ConfigKey, std::size_t> index_;
};

inline ExploreResult explore(const Configuration& initial, const ExploreOptions& opts = {}) {
  return Explorer(initial, opts).explore();
}

// All connected contracted configurations of n particles, one per translation
// class, normalised so that min q = min r = 0, in key order.
inline std::vector<Configuration> enumerate_initial(std::size_t n) {
  if (n < 1 || n > 6) throw std::invalid_argument("enumerate_initial supports 1 <= n <= 6");
  using Shape = std::vector<Node>;
  auto normalise = [](Shape s) {
    const BoundingBox b = bounding_box(s);
    for (Node& v : s) v = v - Node{b.q_min, b.r_min};
    std::sort(s.begin(), s.end());
    return s;
  };
  std::set<Shape> level{Shape{Node{0, 0}}};
  for (std::size_t k = 1; k < n; ++k) {
    std::set<Shape> grown;
    for (const Shape& s : level) {
      for (Node v : s) {
        for (Direction d : kDirections) {
          const Node u = neighbor(v, d);
          if (std::binary_search(s.begin(), s.end(), u)) continue;
          Shape t = s;
          t.push_back(u);
          grown.insert(normalise(std::move(t)));
        }
      }
    }
    level = std::move(grown);
  }
  std::vector<Configuration> out;
  out.reserve(level.size());
  for (const Shape& s : level) out.push_back(Configuration::contracted_from(s));
  return out;
}

}  // namespace silbot
