#pragma once

// Correctness checks over recorded traces.
//
// The checkers rebuild each post-round configuration from the recorded moves
// and expansions (verifying them against the recorded configuration keys) and
// never call into the engine, so they apply equally to traces produced
// elsewhere.

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "silbot/engine.hpp"

namespace silbot {

enum class CheckStatus : std::uint8_t { pass, fail, inconclusive };

inline std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

struct CheckResult {
  CheckResult() = default;
  explicit CheckResult(std::string check_name) : name(std::move(check_name)) {}

  std::string name;
  CheckStatus status = CheckStatus::pass;
  std::optional<std::uint64_t> witness_step;  // step number; 0 is the initial configuration
  std::string detail;
  std::map<std::string, std::int64_t> metrics;

  bool passed() const { return status == CheckStatus::pass; }

  void fail(std::uint64_t step, std::string why, CheckStatus s = CheckStatus::fail) {
    if (status != CheckStatus::pass) return;  // keep the first witness
    status = s;
    witness_step = step;
    detail = std::move(why);
  }
};

struct CheckReport {
  std::vector<CheckResult> results;

  bool passed() const {
    for (const auto& r : results) {
      if (!r.passed()) return false;
    }
    return true;
  }

  const CheckResult* find(std::string_view name) const {
    for (const auto& r : results) {
      if (r.name == name) return &r;
    }
    return nullptr;
  }
};

class MalformedTrace : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Configuration and particle positions as the trace unfolds.
struct TraceCursor {
  const Trace* trace = nullptr;
  std::uint64_t step = 0;
  const StepRecord* record = nullptr;  // null at the initial configuration
  Configuration config;
  std::vector<Node> body;

  bool changed() const { return record == nullptr || record->changed_state(); }
};

class TraceObserver {
 public:
  virtual ~TraceObserver() = default;
  virtual void on_start(const TraceCursor& c) = 0;
  virtual void on_step(const TraceCursor& c) = 0;
  virtual void on_end(const TraceCursor& c) = 0;
};

inline void walk_trace(const Trace& trace, std::span<TraceObserver* const> observers) {
  if (trace.initial.empty()) throw MalformedTrace("trace has no particles");
  TraceCursor cur;
  cur.trace = &trace;
  cur.config = trace.initial;
  cur.body = trace.initial.bodies();
  if (floor_row(cur.body) != trace.floor) throw MalformedTrace("header floor is inconsistent");
  for (auto* o : observers) o->on_start(cur);
  for (const StepRecord& rec : trace.records) {
    ++cur.step;
    if (rec.step != cur.step) throw MalformedTrace("non-contiguous step numbers");
    cur.record = &rec;
    for (const Move& m : rec.moves) {
      if (m.id >= cur.body.size() || cur.body[m.id] != m.from) {
        throw MalformedTrace("move of particle " + std::to_string(m.id) + " at step " +
                             std::to_string(cur.step) + " does not start at its body");
      }
      auto st = cur.config.state_at(m.from);
      if (!st || st->expansion != m.dir || neighbor(m.from, m.dir) != m.to) {
        throw MalformedTrace("move at step " + std::to_string(cur.step) +
                             " does not follow a committed expansion");
      }
    }
    for (const Move& m : rec.moves) cur.config.remove(m.from);
    for (const Move& m : rec.moves) {
      if (!cur.config.place(m.to, ParticleState::contracted())) {
        throw MalformedTrace("two particles on one node at step " + std::to_string(cur.step));
      }
      cur.body[m.id] = m.to;
    }
    for (const Expansion& x : rec.expansions) {
      if (x.id >= cur.body.size()) throw MalformedTrace("expansion of an unknown particle");
      auto st = cur.config.state_at(cur.body[x.id]);
      if (!st || st->is_expanded()) throw MalformedTrace("expansion of an expanded particle");
      cur.config.set_state(cur.body[x.id], ParticleState::expanded(x.dir));
    }
    if (rec.changed_state() && canonical_key(cur.config) != rec.config) {
      throw MalformedTrace("recorded configuration at step " + std::to_string(cur.step) +
                           " does not match its moves");
    }
    for (auto* o : observers) o->on_step(cur);
  }
  for (auto* o : observers) o->on_end(cur);
}

namespace checks {

// No configuration repeats, neither in place nor translated.
class Uniqueness final : public TraceObserver {
 public:
  CheckResult result{"uniqueness"};

  void on_start(const TraceCursor& c) override { visit(c); }
  void on_step(const TraceCursor& c) override {
    if (c.record->changed_state()) {
      ++distinct_;
      visit(c);
    }
  }
  void on_end(const TraceCursor&) override {
    result.metrics["distinct_configs"] = distinct_;
  }

 private:
  void visit(const TraceCursor& c) {
    const ConfigKey abs = c.record ? c.record->config : canonical_key(c.config);
    if (auto [it, fresh] = absolute_.emplace(abs, c.step); !fresh) {
      result.fail(c.step, "configuration of step " + std::to_string(it->second) + " repeats");
    }
    const ConfigKey rel = canonical_key(c.config, KeyMode::translated);
    if (auto [it, fresh] = translated_.emplace(rel, c.step); !fresh) {
      result.fail(c.step,
                  "translate of the configuration of step " + std::to_string(it->second) + " repeats");
    }
  }

  std::unordered_map<ConfigKey, std::uint64_t> absolute_;
  std::unordered_map<ConfigKey, std::uint64_t> translated_;
  std::int64_t distinct_ = 0;
};

// West, north and south sides never move; the east side grows by at most n.
class BoundingBoxBound final : public TraceObserver {
 public:
  CheckResult result{"bbox"};

  void on_start(const TraceCursor& c) override {
    initial_ = bounding_box(c.body);
    prev_ = initial_;
    union_ = initial_;
  }
  void on_step(const TraceCursor& c) override {
    if (c.record->moves.empty()) return;
    const BoundingBox box = bounding_box(c.body);
    if (box.q_min < prev_.q_min) result.fail(c.step, "western side moved west");
    if (box.r_max > prev_.r_max) result.fail(c.step, "northern side moved north");
    if (box.r_min != initial_.r_min) result.fail(c.step, "southern side left the floor");
    prev_ = box;
    union_ = union_.united(box);
  }
  void on_end(const TraceCursor& c) override {
    const auto n = static_cast<Coord>(c.body.size());
    if (union_.we_side() > initial_.we_side() + n) {
      result.fail(c.step, "W-E side grew by " + std::to_string(union_.we_side() - initial_.we_side()) +
                              " > n");
    }
    if (union_.swne_side() > initial_.swne_side()) result.fail(c.step, "SW-NE side grew");
    result.metrics["initial_we_side"] = initial_.we_side();
    result.metrics["initial_swne_side"] = initial_.swne_side();
    result.metrics["union_we_side"] = union_.we_side();
    result.metrics["union_swne_side"] = union_.swne_side();
  }

  const BoundingBox& union_box() const { return union_; }

 private:
  BoundingBox initial_, prev_, union_;
};

// Every reached non-final configuration has a particle that can act.
class Progress final : public TraceObserver {
 public:
  CheckResult result{"progress"};

  void on_start(const TraceCursor& c) override {
    floor_ = c.trace->floor;
    visit(c);
  }
  void on_step(const TraceCursor& c) override {
    if (c.record->changed_state()) visit(c);
  }
  void on_end(const TraceCursor&) override { result.metrics["evaluated"] = evaluated_; }

 private:
  void visit(const TraceCursor& c) {
    if (is_final(c.config, floor_)) return;
    ++evaluated_;
    for (const auto& [v, s] : c.config) {
      if (enabled(c.config, v)) return;
    }
    result.fail(c.step, "no particle enabled in non-final configuration " + canonical_key(c.config));
  }

  Coord floor_ = 0;
  std::int64_t evaluated_ = 0;
};

// Initially adjacent particles that end up in different components get back
// into a common component; the run ends connected on the floor.
class Connectivity final : public TraceObserver {
 public:
  CheckResult result{"connectivity"};

  void on_start(const TraceCursor& c) override {
    const auto& body = c.body;
    for (std::size_t i = 0; i < body.size(); ++i) {
      for (std::size_t j = i + 1; j < body.size(); ++j) {
        if (distance(body[i], body[j]) == 1) pairs_.push_back({i, j});
      }
    }
    split_since_.assign(pairs_.size(), std::nullopt);
    update(c);
  }
  void on_step(const TraceCursor& c) override {
    if (!c.record->moves.empty()) update(c);
  }
  void on_end(const TraceCursor& c) override {
    result.metrics["adjacent_pairs"] = static_cast<std::int64_t>(pairs_.size());
    result.metrics["disconnections"] = disconnections_;
    result.metrics["max_disconnected_rounds"] = static_cast<std::int64_t>(longest_);
    const bool terminated = c.trace->summary.terminated();
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      if (!split_since_[k]) continue;
      const std::string why = "particles " + std::to_string(pairs_[k].first) + " and " +
                              std::to_string(pairs_[k].second) + " split at step " +
                              std::to_string(*split_since_[k]) + " and never rejoined";
      result.fail(*split_since_[k], why, terminated ? CheckStatus::fail : CheckStatus::inconclusive);
    }
    if (!terminated) return;
    const Configuration& end = c.config;
    if (!all_contracted(end)) result.fail(c.step, "terminal configuration has expanded particles");
    if (!is_connected(end)) result.fail(c.step, "terminal configuration is disconnected");
    Coord q_lo = end.begin()->first.q, q_hi = q_lo;
    for (const auto& [v, s] : end) {
      if (v.r != c.trace->floor) result.fail(c.step, "terminal particle off the floor row");
      q_lo = std::min(q_lo, v.q);
      q_hi = std::max(q_hi, v.q);
    }
    if (q_hi - q_lo + 1 != static_cast<Coord>(end.size())) {
      result.fail(c.step, "terminal row is not contiguous");
    }
  }

 private:
  void update(const TraceCursor& c) {
    std::unordered_map<Node, std::size_t, NodeHash> index;
    for (std::size_t i = 0; i < c.body.size(); ++i) index.emplace(c.body[i], i);
    std::vector<std::size_t> label(c.body.size(), SIZE_MAX);
    std::size_t next = 0;
    for (std::size_t i = 0; i < c.body.size(); ++i) {
      if (label[i] != SIZE_MAX) continue;
      std::vector<std::size_t> stack{i};
      label[i] = next;
      while (!stack.empty()) {
        const std::size_t a = stack.back();
        stack.pop_back();
        for (Direction d : kDirections) {
          auto it = index.find(neighbor(c.body[a], d));
          if (it != index.end() && label[it->second] == SIZE_MAX) {
            label[it->second] = next;
            stack.push_back(it->second);
          }
        }
      }
      ++next;
    }
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const bool together = label[pairs_[k].first] == label[pairs_[k].second];
      if (!together && !split_since_[k]) {
        split_since_[k] = c.step;
        ++disconnections_;
      } else if (together && split_since_[k]) {
        longest_ = std::max(longest_, c.step - *split_since_[k]);
        split_since_[k].reset();
      }
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::vector<std::optional<std::uint64_t>> split_since_;
  std::int64_t disconnections_ = 0;
  std::uint64_t longest_ = 0;
};

// At most 2n(n-1) moves in total and n-1 per particle in each direction.
class MoveBound final : public TraceObserver {
 public:
  CheckResult result{"moves"};

  void on_start(const TraceCursor& c) override {
    e_.assign(c.body.size(), 0);
    se_.assign(c.body.size(), 0);
  }
  void on_step(const TraceCursor& c) override {
    for (const Move& m : c.record->moves) {
      ++total_;
      if (m.dir == Direction::E) ++e_[m.id];
      else if (m.dir == Direction::SE) ++se_[m.id];
      else result.fail(c.step, "move toward " + std::string(to_string(m.dir)));
    }
  }
  void on_end(const TraceCursor& c) override {
    const auto n = static_cast<std::int64_t>(c.body.size());
    const std::int64_t max_e = e_.empty() ? 0 : *std::max_element(e_.begin(), e_.end());
    const std::int64_t max_se = se_.empty() ? 0 : *std::max_element(se_.begin(), se_.end());
    result.metrics["moves"] = total_;
    result.metrics["bound"] = 2 * n * (n - 1);
    result.metrics["max_e_moves"] = max_e;
    result.metrics["max_se_moves"] = max_se;
    if (total_ > 2 * n * (n - 1)) result.fail(c.step, "total moves exceed 2n(n-1)");
    if (max_e > n - 1) result.fail(c.step, "a particle moved East more than n-1 times");
    if (max_se > n - 1) result.fail(c.step, "a particle moved South-East more than n-1 times");
  }

 private:
  std::int64_t total_ = 0;
  std::vector<std::int64_t> e_, se_;
};

class Termination final : public TraceObserver {
 public:
  CheckResult result{"terminated"};

  void on_start(const TraceCursor&) override {}
  void on_step(const TraceCursor&) override {}
  void on_end(const TraceCursor& c) override {
    const RunSummary& sum = c.trace->summary;
    result.metrics["steps"] = static_cast<std::int64_t>(c.step);
    if (!sum.terminated()) {
      result.fail(c.step, "not terminated (" + std::string(to_string(sum.status)) + ")");
    } else if (!is_final(c.config, c.trace->floor)) {
      result.fail(c.step, "summary claims termination but the last configuration is not final");
    }
  }
};

template <typename Check>
CheckResult run_single(const Trace& trace) {
  Check check;
  TraceObserver* obs[] = {&check};
  walk_trace(trace, obs);
  return check.result;
}

}  // namespace checks

inline CheckResult check_uniqueness(const Trace& t) { return checks::run_single<checks::Uniqueness>(t); }
inline CheckResult check_bbox(const Trace& t) { return checks::run_single<checks::BoundingBoxBound>(t); }
inline CheckResult check_progress(const Trace& t) { return checks::run_single<checks::Progress>(t); }
inline CheckResult check_connectivity(const Trace& t) {
  return checks::run_single<checks::Connectivity>(t);
}
inline CheckResult check_moves(const Trace& t) { return checks::run_single<checks::MoveBound>(t); }

// All five checks plus termination, in one pass over the trace.
inline CheckReport check_all(const Trace& trace) {
  checks::Uniqueness uniqueness;
  checks::BoundingBoxBound bbox;
  checks::Progress progress;
  checks::Connectivity connectivity;
  checks::MoveBound moves;
  checks::Termination termination;
  TraceObserver* obs[] = {&uniqueness, &bbox, &progress, &connectivity, &moves, &termination};
  walk_trace(trace, obs);
  return {{uniqueness.result, bbox.result, progress.result, connectivity.result, moves.result,
           termination.result}};
}

// Largest number of rounds a particle waited between activations, counting
// from round 0 to the last recorded round.
inline std::uint64_t max_activation_gap(const Trace& trace) {
  std::vector<std::uint64_t> last(trace.n(), 0);
  std::uint64_t gap = 0;
  for (const StepRecord& rec : trace.records) {
    for (ParticleId id : rec.activated) {
      if (id >= last.size()) throw MalformedTrace("activation of an unknown particle");
      gap = std::max(gap, rec.step - last[id]);
      last[id] = rec.step;
    }
  }
  if (!trace.records.empty()) {
    const std::uint64_t end = trace.records.back().step;
    for (std::uint64_t l : last) gap = std::max(gap, end - l);
  }
  return gap;
}

inline CheckResult check_fairness(const Trace& trace, std::uint64_t window) {
  CheckResult r{"fairness"};
  const std::uint64_t gap = max_activation_gap(trace);
  r.metrics["max_gap"] = static_cast<std::int64_t>(gap);
  r.metrics["window"] = static_cast<std::int64_t>(window);
  if (gap > window) r.fail(0, "a particle waited " + std::to_string(gap) + " rounds");
  return r;
}

}  // namespace silbot
