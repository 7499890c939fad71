#pragma once

// Interactive stepping sessions. A client plays the scheduler and the
// adversary: it picks activation sets, answers conflicts, rewinds, and
// exports the resulting trace. Requests and responses are JSON objects that
// carry a mandatory "version" field.
//
//   new     {instance, lenient?}      -> session id + state
//   state   {}                        -> configuration, per-particle predicates, metrics, checks
//   enabled {}                        -> ids that would act if activated
//   query   {nodes: [[q, r], ...]}    -> predicates (and decision) at arbitrary nodes
//   step    {ids, tie_breaks?}        -> applied record + state, or the open conflicts
//   auto    {scheduler, rounds, adversary?}
//   undo    {}
//   export  {}                        -> trace file text

#include <map>
#include <memory>
#include <mutex>

#include "silbot/checkers.hpp"
#include "silbot/io.hpp"
#include "silbot/scheduler.hpp"

namespace silbot {

inline constexpr int kSessionVersion = 1;

class SessionError : public std::runtime_error {
 public:
  SessionError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class Session {
 public:
  explicit Session(Configuration initial, bool strict = true) {
    check_start(initial, strict);
    state_ = RunState::start(initial);
    trace_.initial = std::move(initial);
    trace_.floor = state_.floor;
    trace_.scheduler = "external";
    trace_.adversary = "external";
    last_active_.assign(state_.n(), 0);
  }

  json handle(const json& req) {
    std::lock_guard lock(mutex_);
    const auto type = req.at("type").get<std::string>();
    if (type == "state") return state_json();
    if (type == "enabled") return {{"enabled", enabled_set(state_)}};
    if (type == "query") return query(req);
    if (type == "step") return step(req);
    if (type == "auto") return autorun(req);
    if (type == "undo") return undo();
    if (type == "export") return {{"trace", write_trace(current_trace())}};
    throw SessionError("unknown_request", "unknown request type '" + type + "'");
  }

  const RunState& run_state() const { return state_; }

  Trace current_trace() const {
    Trace t = trace_;
    t.summary = {state_.step_count, state_.move_count, state_.expansion_count, state_.union_bbox,
                 state_.reached_final() ? RunStatus::final : RunStatus::incomplete, ""};
    return t;
  }

  json state_json() const {
    json particles = json::array();
    for (ParticleId id = 0; id < state_.n(); ++id) {
      const Node v = state_.body[id];
      const ParticleState s = state_.state_of(id);
      std::string decision;
      if (s.expansion) {
        decision = occupied(state_.config, neighbor(v, *s.expansion)) ? "blocked" : "contract";
      } else {
        decision = std::string(to_string(decide(state_.config, v)));
      }
      particles.push_back({{"id", id},
                           {"q", v.q},
                           {"r", v.r},
                           {"state", to_string(s)},
                           {"predicates", predicates_json(state_.config, v)},
                           {"decision", decision},
                           {"enabled", particle_enabled(state_, id)},
                           {"idle_rounds", state_.step_count - last_active_[id]}});
    }
    json semi = json::array();
    for (const auto& [v, s] : state_.config) {
      if (s.expansion && !occupied(state_.config, neighbor(v, *s.expansion))) {
        semi.push_back(detail::node_json(neighbor(v, *s.expansion)));
      }
    }
    const Trace t = current_trace();
    const CheckReport report = check_all(t);
    json checks = json::object();
    std::int64_t distinct = 0;
    for (const auto& r : report.results) {
      checks[r.name] = {{"status", to_string(r.status)}, {"detail", r.detail}};
      if (r.name == "uniqueness") distinct = r.metrics.at("distinct_configs");
    }
    const auto n = static_cast<std::int64_t>(state_.n());
    std::uint64_t max_idle = 0;
    for (std::uint64_t l : last_active_) max_idle = std::max(max_idle, state_.step_count - l);
    return {{"config", canonical_key(state_.config)},
            {"n", state_.n()},
            {"floor", state_.floor},
            {"particles", particles},
            {"semi_occupied", semi},
            {"bbox", detail::bbox_json(bounding_box(state_.config.bodies()))},
            {"union_bbox", detail::bbox_json(state_.union_bbox)},
            {"metrics",
             {{"steps", state_.step_count},
              {"moves", state_.move_count},
              {"expansions", state_.expansion_count},
              {"move_budget", 2 * n * (n - 1)},
              {"distinct_configs", distinct},
              {"connected", is_connected(state_.config)},
              {"final", state_.reached_final()},
              {"max_idle_rounds", max_idle},
              {"history", history_.size()}}},
            {"checks", checks}};
  }

  static json predicates_json(const Configuration& c, Node v) {
    const Predicates p = predicates(c, v);
    return {{"upper", p.upper}, {"lower", p.lower}, {"pointed", p.pointed}, {"near", p.near}};
  }

 private:
  json query(const json& req) {
    json out = json::array();
    for (const auto& jn : req.at("nodes")) {
      const Node v = detail::node_from(jn);
      json entry = {{"node", detail::node_json(v)},
                    {"occupied", occupied(state_.config, v)},
                    {"semi_occupied", semi_occupied(state_.config, v)},
                    {"predicates", predicates_json(state_.config, v)}};
      if (auto s = state_.config.state_at(v); s && s->is_contracted()) {
        entry["decision"] = to_string(decide(state_.config, v));
      }
      out.push_back(std::move(entry));
    }
    return {{"nodes", out}};
  }

  static bool same_site(const ConflictGroup& g, const json& tb) {
    if (tb.contains("kind") && tb.at("kind").get<std::string>() !=
                                   (g.kind == ConflictGroup::Kind::node ? "node" : "edge")) {
      return false;
    }
    if (detail::node_from(tb.at("site")) != g.site) return false;
    return !tb.contains("site_other") || detail::node_from(tb.at("site_other")) == g.site_other;
  }

  json step(const json& req) {
    std::vector<ParticleId> ids = req.at("ids").get<std::vector<ParticleId>>();
    if (ids.empty()) throw SessionError("bad_request", "step needs at least one particle id");
    for (ParticleId id : ids) {
      if (id >= state_.n()) throw SessionError("bad_request", "unknown particle id " + std::to_string(id));
    }
    const json answers = req.value("tie_breaks", json::array());
    const std::vector<ConflictGroup> groups = pending_conflicts(state_, ids);
    std::vector<ParticleId> picks;
    json open = json::array();
    for (const auto& g : groups) {
      std::optional<ParticleId> pick;
      for (const auto& tb : answers) {
        if (same_site(g, tb)) pick = tb.at("chosen").get<ParticleId>();
      }
      if (!pick) {
        open.push_back(conflict_json(g));
        continue;
      }
      if (!g.contains(*pick)) {
        throw SessionError("bad_tie_break", "chosen particle " + std::to_string(*pick) +
                                                " is not in the conflict group");
      }
      picks.push_back(*pick);
    }
    if (!open.empty()) {
      return {{"applied", false}, {"conflicts", open}};
    }
    std::size_t next_pick = 0;
    ExternalAdversary adversary([&](const ConflictGroup&) { return picks.at(next_pick++); });
    apply(ids, adversary);
    return {{"applied", true}, {"record", record_json(trace_.records.back())}, {"state", state_json()}};
  }

  json autorun(const json& req) {
    const SchedulerSpec sched = parse_scheduler_spec(req.value("scheduler", std::string("sync")));
    if (sched.kind == SchedulerSpec::Kind::external) {
      throw SessionError("bad_request", "auto needs a non-external scheduler");
    }
    const AdversarySpec adv = parse_adversary_spec(req.value("adversary", std::string("first")));
    if (adv.kind == AdversarySpec::Kind::external) {
      throw SessionError("bad_request", "auto needs a non-external adversary");
    }
    const auto rounds = req.value("rounds", std::uint64_t{1});
    auto scheduler = make_scheduler(sched);
    auto adversary = make_adversary(adv);
    json records = json::array();
    for (std::uint64_t i = 0; i < rounds && !state_.reached_final(); ++i) {
      apply(scheduler->next(state_), *adversary);
      records.push_back(record_json(trace_.records.back()));
    }
    return {{"records", records}, {"state", state_json()}};
  }

  json undo() {
    if (history_.empty()) throw SessionError("nothing_to_undo", "no step to undo");
    state_ = std::move(history_.back().state);
    last_active_ = std::move(history_.back().last_active);
    history_.pop_back();
    trace_.records.pop_back();
    return {{"state", state_json()}};
  }

  void apply(const std::vector<ParticleId>& ids, Adversary& adversary) {
    auto [next, rec] = step_round(state_, ids, adversary);
    history_.push_back({std::move(state_), last_active_});
    state_ = std::move(next);
    for (ParticleId id : rec.activated) last_active_[id] = state_.step_count;
    trace_.records.push_back(std::move(rec));
  }

  struct Snapshot {
    RunState state;
    std::vector<std::uint64_t> last_active;
  };

  std::mutex mutex_;
  RunState state_;
  Trace trace_;
  std::vector<Snapshot> history_;
  std::vector<std::uint64_t> last_active_;
};

// Routes requests to sessions by id; "new" creates one.
class SessionManager {
 public:
  json handle(const json& req) noexcept {
    json resp;
    try {
      if (!req.is_object()) throw SessionError("bad_request", "request must be a JSON object");
      if (!req.contains("version")) throw SessionError("bad_request", "missing version field");
      if (req.at("version").get<int>() != kSessionVersion) {
        throw SessionError("bad_version", "unsupported protocol version");
      }
      const auto type = req.at("type").get<std::string>();
      if (type == "new") {
        const Configuration c = parse_instance(req.at("instance").get<std::string>());
        auto session = std::make_shared<Session>(c, !req.value("lenient", false));
        std::string id;
        {
          std::lock_guard lock(mutex_);
          id = "s" + std::to_string(++counter_);
          sessions_.emplace(id, session);
        }
        resp = {{"session", id}, {"state", session->state_json()}};
      } else {
        const auto id = req.at("session").get<std::string>();
        std::shared_ptr<Session> session;
        {
          std::lock_guard lock(mutex_);
          auto it = sessions_.find(id);
          if (it == sessions_.end()) throw SessionError("unknown_session", "no session " + id);
          session = it->second;
        }
        resp = session->handle(req);
        resp["session"] = id;
      }
      resp["ok"] = true;
    } catch (const SessionError& e) {
      resp = {{"ok", false}, {"error", e.code()}, {"message", e.what()}};
    } catch (const std::exception& e) {
      resp = {{"ok", false}, {"error", "bad_request"}, {"message", e.what()}};
    }
    resp["version"] = kSessionVersion;
    if (req.is_object() && req.contains("type") && req.at("type").is_string()) {
      resp["type"] = req.at("type");
    }
    return resp;
  }

  // Newline-delimited JSON; "session" defaults to the most recent "new".
  std::string handle_line(std::string_view line) {
    json req;
    try {
      req = json::parse(line);
    } catch (const json::exception& e) {
      return json{{"ok", false}, {"error", "bad_json"}, {"message", e.what()}, {"version", kSessionVersion}}
          .dump();
    }
    if (req.is_object() && !req.contains("session") && !last_.empty()) req["session"] = last_;
    json resp = handle(req);
    if (resp.value("ok", false) && resp.contains("session")) last_ = resp["session"].get<std::string>();
    return resp.dump();
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
  std::string last_;
};

}  // namespace silbot
