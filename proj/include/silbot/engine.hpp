#pragma once

// Round-based execution of the particle system.
//
// Every activated particle observes the same pre-round snapshot. Expanded
// particles whose target is empty contract into it; when several point at the
// same empty node the adversary lets exactly one through and the rest stay
// expanded. Contracted particles evaluate the rule; simultaneous claims on
// one undirected edge are settled by the adversary the same way.
//
// Particle ids are an engine/trace artefact. The rule never sees them.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "silbot/model.hpp"
#include "silbot/wrain.hpp"

namespace silbot {

using ParticleId = std::uint32_t;

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunState {
  Configuration config;
  std::vector<Node> body;  // indexed by particle id
  Coord floor = 0;
  std::uint64_t step_count = 0;
  std::uint64_t expansion_count = 0;
  std::uint64_t move_count = 0;
  std::vector<std::uint32_t> e_moves;
  std::vector<std::uint32_t> se_moves;
  BoundingBox initial_bbox;
  BoundingBox union_bbox;
  // Stale-view mode only: a decision observed at Look, applied at the next Act.
  std::vector<std::optional<Action>> latched;

  // Ids follow the sorted order of the initial body nodes.
  static RunState start(const Configuration& initial) {
    if (initial.empty()) throw EngineError("cannot start a run without particles");
    RunState s;
    s.config = initial;
    s.body = initial.bodies();
    const std::size_t n = s.body.size();
    s.initial_bbox = bounding_box(s.body);
    s.union_bbox = s.initial_bbox;
    s.floor = s.initial_bbox.r_min;
    s.e_moves.assign(n, 0);
    s.se_moves.assign(n, 0);
    s.latched.assign(n, std::nullopt);
    return s;
  }

  std::size_t n() const { return body.size(); }

  ParticleState state_of(ParticleId id) const { return *config.state_at(body.at(id)); }

  std::optional<ParticleId> id_at(Node v) const {
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i] == v) return static_cast<ParticleId>(i);
    }
    return std::nullopt;
  }

  bool reached_final() const { return is_final(config, floor); }
};

struct ConflictGroup {
  enum class Kind : std::uint8_t { node, edge };
  Kind kind = Kind::node;
  Node site;        // contested node, or lower endpoint of the contested edge
  Node site_other;  // upper endpoint of the contested edge (edge conflicts)
  std::vector<ParticleId> members;  // sorted

  bool contains(ParticleId id) const {
    return std::find(members.begin(), members.end(), id) != members.end();
  }

  friend bool operator==(const ConflictGroup&, const ConflictGroup&) = default;
};

class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual ParticleId choose(const ConflictGroup& group) = 0;
};

enum class Decision : std::uint8_t { noop, expand_e, expand_se, contract, blocked, look };

inline std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::noop: return "noop";
    case Decision::expand_e: return "expand_E";
    case Decision::expand_se: return "expand_SE";
    case Decision::contract: return "contract";
    case Decision::blocked: return "blocked";
    case Decision::look: return "look";
  }
  return "?";
}

inline std::optional<Decision> parse_decision(std::string_view s) {
  for (Decision d : {Decision::noop, Decision::expand_e, Decision::expand_se, Decision::contract,
                     Decision::blocked, Decision::look}) {
    if (to_string(d) == s) return d;
  }
  return std::nullopt;
}

struct TieBreak {
  ConflictGroup group;
  ParticleId chosen = 0;
  friend bool operator==(const TieBreak&, const TieBreak&) = default;
};

struct Move {
  ParticleId id = 0;
  Node from;
  Node to;
  Direction dir = Direction::E;
  friend bool operator==(const Move&, const Move&) = default;
};

struct Expansion {
  ParticleId id = 0;
  Direction dir = Direction::E;
  friend bool operator==(const Expansion&, const Expansion&) = default;
};

struct StepRecord {
  std::uint64_t step = 0;
  std::vector<ParticleId> activated;
  std::vector<std::pair<ParticleId, Decision>> decisions;
  std::vector<TieBreak> tie_breaks;
  std::vector<Move> moves;
  std::vector<Expansion> expansions;
  ConfigKey config;

  bool changed_state() const { return !moves.empty() || !expansions.empty(); }

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

enum class RunStatus : std::uint8_t { final, limit, deadlock, fairness, incomplete };

inline std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::final: return "final";
    case RunStatus::limit: return "limit";
    case RunStatus::deadlock: return "deadlock";
    case RunStatus::fairness: return "fairness";
    case RunStatus::incomplete: return "incomplete";
  }
  return "?";
}

inline std::optional<RunStatus> parse_run_status(std::string_view s) {
  for (RunStatus r : {RunStatus::final, RunStatus::limit, RunStatus::deadlock, RunStatus::fairness,
                      RunStatus::incomplete}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

struct RunSummary {
  std::uint64_t steps = 0;
  std::uint64_t moves = 0;
  std::uint64_t expansions = 0;
  BoundingBox union_bbox;
  RunStatus status = RunStatus::incomplete;
  std::string detail;

  bool terminated() const { return status == RunStatus::final; }
  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

struct Trace {
  Configuration initial;
  Coord floor = 0;
  std::string scheduler;
  std::string adversary;
  bool stale_view = false;
  std::vector<StepRecord> records;
  RunSummary summary;

  std::size_t n() const { return initial.size(); }
  friend bool operator==(const Trace&, const Trace&) = default;
};

struct StepOptions {
  bool stale_view = false;
};

namespace detail {

using Edge = std::pair<Node, Node>;

inline Edge undirected(Node a, Node b) { return a < b ? Edge{a, b} : Edge{b, a}; }

struct RoundPlan {
  std::vector<ParticleId> activated;
  std::vector<std::pair<ParticleId, Decision>> decisions;
  std::map<Node, std::vector<ParticleId>> contractions;            // target -> candidates
  std::map<Edge, std::vector<std::pair<ParticleId, Direction>>> claims;  // edge -> claimants
  std::vector<ParticleId> latch_clear;
  std::vector<std::pair<ParticleId, Action>> latch_set;
};

inline RoundPlan plan_round(const RunState& s, std::span<const ParticleId> activated,
                            const StepOptions& opts) {
  RoundPlan plan;
  plan.activated.assign(activated.begin(), activated.end());
  std::sort(plan.activated.begin(), plan.activated.end());
  plan.activated.erase(std::unique(plan.activated.begin(), plan.activated.end()),
                       plan.activated.end());
  if (plan.activated.empty()) throw EngineError("activation set is empty");

  std::map<Edge, bool> held;  // edges already held by an expansion in the snapshot
  for (const auto& [v, st] : s.config) {
    if (st.expansion) held[undirected(v, neighbor(v, *st.expansion))] = true;
  }

  for (ParticleId id : plan.activated) {
    if (id >= s.n()) throw EngineError("unknown particle id " + std::to_string(id));
    const Node v = s.body[id];
    const ParticleState st = *s.config.state_at(v);
    if (st.expansion) {
      const Node u = neighbor(v, *st.expansion);
      if (occupied(s.config, u)) {
        plan.decisions.emplace_back(id, Decision::blocked);
      } else {
        plan.decisions.emplace_back(id, Decision::contract);
        plan.contractions[u].push_back(id);
      }
      continue;
    }
    Action action = Action::noop;
    if (opts.stale_view && !s.latched[id]) {
      const Action seen = decide(s.config, v);
      plan.decisions.emplace_back(id, seen == Action::noop ? Decision::noop : Decision::look);
      if (seen != Action::noop) plan.latch_set.emplace_back(id, seen);
      continue;
    }
    if (opts.stale_view) {
      action = *s.latched[id];
      plan.latch_clear.push_back(id);
    } else {
      action = decide(s.config, v);
    }
    switch (action) {
      case Action::noop: plan.decisions.emplace_back(id, Decision::noop); break;
      case Action::expand_e: plan.decisions.emplace_back(id, Decision::expand_e); break;
      case Action::expand_se: plan.decisions.emplace_back(id, Decision::expand_se); break;
    }
    if (auto d = direction_of(action)) {
      const Edge e = undirected(v, neighbor(v, *d));
      if (!held.contains(e)) plan.claims[e].emplace_back(id, *d);
    }
  }
  return plan;
}

inline std::vector<ConflictGroup> conflicts_of(const RoundPlan& plan) {
  std::vector<ConflictGroup> out;
  for (const auto& [u, ids] : plan.contractions) {
    if (ids.size() < 2) continue;
    out.push_back({ConflictGroup::Kind::node, u, u, ids});
  }
  for (const auto& [e, claimants] : plan.claims) {
    if (claimants.size() < 2) continue;
    ConflictGroup g{ConflictGroup::Kind::edge, e.first, e.second, {}};
    for (const auto& [id, d] : claimants) g.members.push_back(id);
    std::sort(g.members.begin(), g.members.end());
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace detail

// Conflict groups the adversary will be asked about, in the order it will be
// asked, for this activation set.
inline std::vector<ConflictGroup> pending_conflicts(const RunState& s,
                                                    std::span<const ParticleId> activated,
                                                    const StepOptions& opts = {}) {
  return detail::conflicts_of(detail::plan_round(s, activated, opts));
}

inline std::pair<RunState, StepRecord> step_round(const RunState& s,
                                                  std::span<const ParticleId> activated,
                                                  Adversary& adversary,
                                                  const StepOptions& opts = {}) {
  detail::RoundPlan plan = detail::plan_round(s, activated, opts);

  StepRecord rec;
  rec.step = s.step_count + 1;
  rec.activated = plan.activated;
  rec.decisions = plan.decisions;

  auto settle = [&](ConflictGroup group) {
    const ParticleId chosen = adversary.choose(group);
    if (!group.contains(chosen)) {
      throw EngineError("adversary chose particle " + std::to_string(chosen) +
                        " outside its conflict group");
    }
    rec.tie_breaks.push_back({std::move(group), chosen});
    return chosen;
  };

  RunState next = s;
  next.step_count = s.step_count + 1;

  for (const auto& [u, ids] : plan.contractions) {
    ParticleId winner = ids.front();
    if (ids.size() > 1) winner = settle({ConflictGroup::Kind::node, u, u, ids});
    const Node from = s.body[winner];
    const Direction dir = *s.config.state_at(from)->expansion;
    rec.moves.push_back({winner, from, u, dir});
  }

  for (const auto& [e, claimants] : plan.claims) {
    std::pair<ParticleId, Direction> winner = claimants.front();
    if (claimants.size() > 1) {
      ConflictGroup g{ConflictGroup::Kind::edge, e.first, e.second, {}};
      for (const auto& [id, d] : claimants) g.members.push_back(id);
      std::sort(g.members.begin(), g.members.end());
      const ParticleId chosen = settle(std::move(g));
      for (const auto& c : claimants) {
        if (c.first == chosen) winner = c;
      }
    }
    rec.expansions.push_back({winner.first, winner.second});
  }
  std::sort(rec.expansions.begin(), rec.expansions.end(),
            [](const Expansion& a, const Expansion& b) { return a.id < b.id; });

  for (const Move& m : rec.moves) {
    next.config.remove(m.from);
    next.config.place(m.to, ParticleState::contracted());
    next.body[m.id] = m.to;
    next.union_bbox = next.union_bbox.extended(m.to);
    if (m.dir == Direction::E) ++next.e_moves[m.id];
    if (m.dir == Direction::SE) ++next.se_moves[m.id];
  }
  for (const Expansion& x : rec.expansions) {
    next.config.set_state(next.body[x.id], ParticleState::expanded(x.dir));
  }
  for (ParticleId id : plan.latch_clear) next.latched[id].reset();
  for (const auto& [id, a] : plan.latch_set) next.latched[id] = a;

  next.move_count += rec.moves.size();
  next.expansion_count += rec.expansions.size();
  rec.config = canonical_key(next.config);
  return {std::move(next), std::move(rec)};
}

inline bool particle_enabled(const RunState& s, ParticleId id, const StepOptions& opts = {}) {
  if (opts.stale_view && s.latched[id]) return true;
  return enabled(s.config, s.body[id]);
}

inline std::vector<ParticleId> enabled_set(const RunState& s, const StepOptions& opts = {}) {
  std::vector<ParticleId> out;
  for (ParticleId id = 0; id < s.n(); ++id) {
    if (particle_enabled(s, id, opts)) out.push_back(id);
  }
  return out;
}

class Scheduler {
 public:
  virtual ~Scheduler() = default;
  virtual std::vector<ParticleId> next(const RunState& s) = 0;
  // Whether the run should abort when a particle waits longer than the
  // fairness window.
  virtual bool enforces_fairness() const { return true; }
};

struct RunLimits {
  std::uint64_t max_steps = 0;     // 0: 64 n^2
  std::uint64_t max_moves = 0;     // 0: unlimited
  std::uint64_t fairness_window = 0;  // 0: 2n
  bool strict = true;              // require an initial configuration
  bool stale_view = false;

  std::uint64_t steps_for(std::size_t n) const {
    return max_steps ? max_steps : 64 * static_cast<std::uint64_t>(n) * n;
  }
  std::uint64_t window_for(std::size_t n) const {
    return fairness_window ? fairness_window : 2 * static_cast<std::uint64_t>(n);
  }
};

inline void check_start(const Configuration& c0, bool strict) {
  if (auto v = validate(c0); !v.empty()) throw EngineError("invalid configuration: " + v.front());
  if (strict && !is_initial(c0)) {
    throw EngineError("configuration is not initial (contracted and connected)");
  }
}

inline Trace run(const Configuration& c0, Scheduler& scheduler, Adversary& adversary,
                 const RunLimits& limits = {}, std::string scheduler_name = {},
                 std::string adversary_name = {}) {
  check_start(c0, limits.strict);
  const StepOptions opts{limits.stale_view};
  RunState s = RunState::start(c0);
  Trace trace;
  trace.initial = c0;
  trace.floor = s.floor;
  trace.scheduler = std::move(scheduler_name);
  trace.adversary = std::move(adversary_name);
  trace.stale_view = limits.stale_view;

  const std::size_t n = s.n();
  const std::uint64_t max_steps = limits.steps_for(n);
  const std::uint64_t window = limits.window_for(n);
  std::vector<std::uint64_t> last_active(n, 0);
  std::uint64_t idle_streak = 0;

  RunStatus status = RunStatus::incomplete;
  std::string detail;
  while (true) {
    if (s.reached_final()) {
      status = RunStatus::final;
      break;
    }
    if (s.step_count >= max_steps) {
      status = RunStatus::limit;
      detail = "step limit " + std::to_string(max_steps) + " reached";
      break;
    }
    if (limits.max_moves && s.move_count >= limits.max_moves) {
      status = RunStatus::limit;
      detail = "move limit " + std::to_string(limits.max_moves) + " reached";
      break;
    }
    std::vector<ParticleId> act = scheduler.next(s);
    if (act.empty()) {
      if (!enabled_set(s, opts).empty()) {
        status = RunStatus::fairness;
        detail = "scheduler returned an empty activation set while particles are enabled";
      } else {
        status = RunStatus::deadlock;
        detail = "no particle is enabled in a non-final configuration";
      }
      break;
    }
    auto [next, rec] = step_round(s, act, adversary, opts);
    idle_streak = rec.changed_state() ? 0 : idle_streak + 1;
    s = std::move(next);
    for (ParticleId id : rec.activated) last_active[id] = s.step_count;
    trace.records.push_back(std::move(rec));

    if (scheduler.enforces_fairness()) {
      for (ParticleId id = 0; id < n; ++id) {
        if (s.step_count - last_active[id] >= window) {
          status = RunStatus::fairness;
          detail = "particle " + std::to_string(id) + " not activated within " +
                   std::to_string(window) + " rounds";
        }
      }
      if (status == RunStatus::fairness) break;
    }
    // Under a fair scheduler a full window without change means every particle
    // saw this configuration and had nothing to do.
    if (idle_streak >= window || (!scheduler.enforces_fairness() && idle_streak > 0)) {
      if (!s.reached_final() && enabled_set(s, opts).empty()) {
        status = RunStatus::deadlock;
        detail = "no particle is enabled in a non-final configuration";
        break;
      }
      if (idle_streak >= window) idle_streak = 0;
    }
  }

  trace.summary = {s.step_count, s.move_count, s.expansion_count, s.union_bbox, status, detail};
  return trace;
}

// Replays recorded choices, one per conflict, verifying each group matches.
class ScriptedAdversary final : public Adversary {
 public:
  explicit ScriptedAdversary(std::vector<TieBreak> script) : script_(std::move(script)) {}

  ParticleId choose(const ConflictGroup& group) override {
    if (next_ >= script_.size()) throw EngineError("unrecorded conflict");
    const TieBreak& tb = script_[next_++];
    if (!(tb.group == group)) throw EngineError("conflict group differs from the recorded one");
    return tb.chosen;
  }

  bool exhausted() const { return next_ == script_.size(); }

 private:
  std::vector<TieBreak> script_;
  std::size_t next_ = 0;
};

struct ReplayResult {
  bool ok = true;
  std::optional<std::uint64_t> divergent_step;  // 1-based step number
  std::string message;
};

inline ReplayResult replay(const Trace& trace) {
  RunState s;
  try {
    s = RunState::start(trace.initial);
  } catch (const std::exception& e) {
    return {false, 0, e.what()};
  }
  if (s.floor != trace.floor) return {false, 0, "recorded floor differs from the initial one"};
  const StepOptions opts{trace.stale_view};
  for (const StepRecord& rec : trace.records) {
    const std::uint64_t step = s.step_count + 1;
    if (rec.step != step) return {false, step, "step numbering is not contiguous"};
    try {
      ScriptedAdversary scripted(rec.tie_breaks);
      auto [next, got] = step_round(s, rec.activated, scripted, opts);
      if (!scripted.exhausted()) return {false, step, "recorded tie-breaks were not all used"};
      if (got.config != rec.config) return {false, step, "configuration differs from the record"};
      if (!(got == rec)) return {false, step, "step record differs from the recorded one"};
      s = std::move(next);
    } catch (const std::exception& e) {
      return {false, step, e.what()};
    }
  }
  const RunSummary& sum = trace.summary;
  if (sum.steps != s.step_count || sum.moves != s.move_count ||
      sum.expansions != s.expansion_count || !(sum.union_bbox == s.union_bbox)) {
    return {false, std::nullopt, "summary counters differ from the replayed run"};
  }
  if (sum.terminated() != s.reached_final()) {
    return {false, std::nullopt, "summary termination flag differs from the replayed run"};
  }
  return {};
}

}  // namespace silbot
