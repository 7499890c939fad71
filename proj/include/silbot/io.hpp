#pragma once

// Instance files, JSON-lines traces and SVG frames.
//
// Instance file: '#' starts a comment line; otherwise one particle per line,
// "q r" for a contracted particle or "q r DIR" for one expanded toward DIR.
//
// Trace file: one JSON object per line with sorted keys. Line 1 is the header
// (version, n, floor, initial particles in id order), then one line per round,
// then a summary line.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "silbot/engine.hpp"

namespace silbot {

inline constexpr int kTraceVersion = 1;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out << text;
  if (!out) throw FormatError("write failed for " + path);
}

// ---------------------------------------------------------------- instances

inline Configuration parse_instance(std::string_view text) {
  Configuration c;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw FormatError("line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string q_s, r_s, dir_s, extra;
    fields >> q_s >> r_s >> dir_s >> extra;
    if (r_s.empty()) fail("expected 'q r' or 'q r DIR'");
    if (!extra.empty()) fail("trailing fields");
    Node v;
    try {
      std::size_t used = 0;
      v.q = std::stoll(q_s, &used);
      if (used != q_s.size()) fail("bad coordinate '" + q_s + "'");
      v.r = std::stoll(r_s, &used);
      if (used != r_s.size()) fail("bad coordinate '" + r_s + "'");
    } catch (const std::logic_error&) {
      fail("bad coordinate");
    }
    ParticleState s;
    if (!dir_s.empty()) {
      auto d = parse_direction(dir_s);
      if (!d) fail("unknown direction '" + dir_s + "'");
      s = ParticleState::expanded(*d);
    }
    if (!c.place(v, s)) {
      std::ostringstream msg;
      msg << "duplicate particle at " << v;
      fail(msg.str());
    }
  }
  if (auto violations = validate(c); !violations.empty()) {
    throw FormatError("invalid instance: " + violations.front());
  }
  return c;
}

inline Configuration load_instance(const std::string& path) { return parse_instance(read_file(path)); }

inline std::string render_instance(const Configuration& c, std::string_view comment = {}) {
  std::ostringstream out;
  out << "# silbot instance, n = " << c.size() << '\n';
  if (!comment.empty()) out << "# " << comment << '\n';
  for (const auto& [v, s] : c) {
    out << v.q << ' ' << v.r;
    if (s.expansion) out << ' ' << to_string(*s.expansion);
    out << '\n';
  }
  return out.str();
}

// ------------------------------------------------------------------- traces

using json = nlohmann::json;

namespace detail {

inline json node_json(Node v) { return json::array({v.q, v.r}); }

inline Node node_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw FormatError("node must be [q, r]");
  return {j.at(0).get<Coord>(), j.at(1).get<Coord>()};
}

inline Direction direction_from(const json& j) {
  auto d = parse_direction(j.get<std::string>());
  if (!d) throw FormatError("unknown direction " + j.dump());
  return *d;
}

inline json bbox_json(const BoundingBox& b) {
  return {{"q_min", b.q_min}, {"q_max", b.q_max}, {"r_min", b.r_min}, {"r_max", b.r_max}};
}

inline BoundingBox bbox_from(const json& j) {
  return {j.at("q_min").get<Coord>(), j.at("q_max").get<Coord>(), j.at("r_min").get<Coord>(),
          j.at("r_max").get<Coord>()};
}

}  // namespace detail

inline json conflict_json(const ConflictGroup& g) {
  return {{"kind", g.kind == ConflictGroup::Kind::node ? "node" : "edge"},
          {"site", detail::node_json(g.site)},
          {"site_other", detail::node_json(g.site_other)},
          {"group", g.members}};
}

inline ConflictGroup conflict_from(const json& j) {
  ConflictGroup g;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "node") g.kind = ConflictGroup::Kind::node;
  else if (kind == "edge") g.kind = ConflictGroup::Kind::edge;
  else throw FormatError("unknown conflict kind " + kind);
  g.site = detail::node_from(j.at("site"));
  g.site_other = detail::node_from(j.at("site_other"));
  g.members = j.at("group").get<std::vector<ParticleId>>();
  return g;
}

inline json header_json(const Trace& t) {
  json particles = json::array();
  ParticleId id = 0;
  for (const auto& [v, s] : t.initial) {
    particles.push_back({{"id", id++}, {"q", v.q}, {"r", v.r}, {"state", to_string(s)}});
  }
  return {{"type", "header"},       {"version", kTraceVersion},   {"n", t.n()},
          {"floor", t.floor},       {"particles", particles},     {"scheduler", t.scheduler},
          {"adversary", t.adversary}, {"stale_view", t.stale_view}};
}

inline json record_json(const StepRecord& r) {
  json decisions = json::array();
  for (const auto& [id, d] : r.decisions) decisions.push_back({{"id", id}, {"decision", to_string(d)}});
  json ties = json::array();
  for (const auto& tb : r.tie_breaks) {
    json j = conflict_json(tb.group);
    j["chosen"] = tb.chosen;
    ties.push_back(std::move(j));
  }
  json moves = json::array();
  for (const auto& m : r.moves) {
    moves.push_back({{"id", m.id},
                     {"from", detail::node_json(m.from)},
                     {"to", detail::node_json(m.to)},
                     {"dir", to_string(m.dir)}});
  }
  json expansions = json::array();
  for (const auto& x : r.expansions) expansions.push_back({{"id", x.id}, {"dir", to_string(x.dir)}});
  return {{"type", "step"},           {"step", r.step},         {"activated", r.activated},
          {"decisions", decisions},   {"tie_breaks", ties},     {"moves", moves},
          {"expansions", expansions}, {"config", r.config}};
}

inline json summary_json(const RunSummary& s) {
  return {{"type", "summary"},
          {"steps", s.steps},
          {"moves", s.moves},
          {"expansions", s.expansions},
          {"union_bbox", detail::bbox_json(s.union_bbox)},
          {"terminated", s.terminated()},
          {"status", to_string(s.status)},
          {"detail", s.detail}};
}

inline std::string write_trace(const Trace& t) {
  std::string out = header_json(t).dump();
  out.push_back('\n');
  for (const StepRecord& r : t.records) {
    out += record_json(r).dump();
    out.push_back('\n');
  }
  out += summary_json(t.summary).dump();
  out.push_back('\n');
  return out;
}

// Without a summary line the trace reads as incomplete.
inline Trace read_trace(std::string_view text) {
  Trace t;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false, have_summary = false;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      if (have_summary) throw FormatError("content after the summary line");
      const json j = json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (!have_header) {
        if (type != "header") throw FormatError("first line must be the header");
        if (j.at("version").get<int>() != kTraceVersion) throw FormatError("unsupported trace version");
        for (const auto& p : j.at("particles")) {
          ParticleState s;
          const auto st = p.at("state").get<std::string>();
          if (st != "C") {
            auto d = parse_direction(st);
            if (!d) throw FormatError("unknown particle state " + st);
            s = ParticleState::expanded(*d);
          }
          if (!t.initial.place({p.at("q").get<Coord>(), p.at("r").get<Coord>()}, s)) {
            throw FormatError("duplicate particle in header");
          }
        }
        if (j.at("n").get<std::size_t>() != t.initial.size()) throw FormatError("header n mismatch");
        // Ids are the sorted order of initial nodes; the header must list them so.
        ParticleId expect = 0;
        auto it = t.initial.begin();
        for (const auto& p : j.at("particles")) {
          if (p.at("id").get<ParticleId>() != expect++ ||
              Node{p.at("q").get<Coord>(), p.at("r").get<Coord>()} != it->first) {
            throw FormatError("header particles must be listed in id order");
          }
          ++it;
        }
        t.floor = j.at("floor").get<Coord>();
        t.scheduler = j.value("scheduler", "");
        t.adversary = j.value("adversary", "");
        t.stale_view = j.value("stale_view", false);
        have_header = true;
      } else if (type == "step") {
        StepRecord r;
        r.step = j.at("step").get<std::uint64_t>();
        r.activated = j.at("activated").get<std::vector<ParticleId>>();
        for (const auto& d : j.at("decisions")) {
          auto dec = parse_decision(d.at("decision").get<std::string>());
          if (!dec) throw FormatError("unknown decision");
          r.decisions.emplace_back(d.at("id").get<ParticleId>(), *dec);
        }
        for (const auto& tb : j.at("tie_breaks")) {
          r.tie_breaks.push_back({conflict_from(tb), tb.at("chosen").get<ParticleId>()});
        }
        for (const auto& m : j.at("moves")) {
          r.moves.push_back({m.at("id").get<ParticleId>(), detail::node_from(m.at("from")),
                             detail::node_from(m.at("to")), detail::direction_from(m.at("dir"))});
        }
        for (const auto& x : j.at("expansions")) {
          r.expansions.push_back({x.at("id").get<ParticleId>(), detail::direction_from(x.at("dir"))});
        }
        r.config = j.at("config").get<std::string>();
        t.records.push_back(std::move(r));
      } else if (type == "summary") {
        RunSummary& s = t.summary;
        s.steps = j.at("steps").get<std::uint64_t>();
        s.moves = j.at("moves").get<std::uint64_t>();
        s.expansions = j.at("expansions").get<std::uint64_t>();
        s.union_bbox = detail::bbox_from(j.at("union_bbox"));
        auto status = parse_run_status(j.at("status").get<std::string>());
        if (!status) throw FormatError("unknown run status");
        s.status = *status;
        s.detail = j.value("detail", "");
        if (s.terminated() != j.at("terminated").get<bool>()) {
          throw FormatError("summary status and terminated flag disagree");
        }
        have_summary = true;
      } else {
        throw FormatError("unknown record type " + type);
      }
    }
  } catch (const FormatError& e) {
    throw FormatError("trace line " + std::to_string(lineno) + ": " + e.what());
  } catch (const json::exception& e) {
    throw FormatError("trace line " + std::to_string(lineno) + ": " + e.what());
  }
  if (!have_header) throw FormatError("trace has no header");
  if (!have_summary) {
    t.summary.status = RunStatus::incomplete;
    t.summary.steps = t.records.size();
  }
  return t;
}

inline Trace load_trace(const std::string& path) { return read_trace(read_file(path)); }

// -------------------------------------------------------------------- SVG

struct SvgStyle {
  double scale = 40.0;   // pixels per edge
  double margin = 1.0;   // in edge lengths
  double particle_radius = 0.28;
  double node_radius = 0.05;
};

namespace detail {

inline std::string fmt2(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

}  // namespace detail

// A frame of `c` drawn inside `viewport` (node coordinates). The floor row is
// dashed, the bounding box of the bodies outlined, semi-occupied nodes ringed.
inline std::string render_svg(const Configuration& c, Coord floor, const BoundingBox& viewport,
                              const SvgStyle& style = {}) {
  const double h = std::sqrt(3.0) / 2.0;
  auto px = [&](double x, double y) {
    return std::pair{x * style.scale, y * style.scale};
  };
  const double x_lo = static_cast<double>(viewport.q_min) + viewport.r_min / 2.0 - style.margin;
  const double x_hi = static_cast<double>(viewport.q_max) + viewport.r_max / 2.0 + style.margin;
  const double y_lo = -static_cast<double>(viewport.r_max) * h - style.margin;
  const double y_hi = -static_cast<double>(viewport.r_min) * h + style.margin;
  auto place = [&](Node v) {
    return px(static_cast<double>(v.q) + v.r / 2.0 - x_lo, -static_cast<double>(v.r) * h - y_lo);
  };
  using detail::fmt2;
  std::ostringstream out;
  const auto [width, height] = px(x_hi - x_lo, y_hi - y_lo);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt2(width) << "\" height=\""
      << fmt2(height) << "\" viewBox=\"0 0 " << fmt2(width) << ' ' << fmt2(height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (Coord r = viewport.r_min; r <= viewport.r_max; ++r) {
    for (Coord q = viewport.q_min; q <= viewport.q_max; ++q) {
      const auto [x, y] = place({q, r});
      out << "<circle cx=\"" << fmt2(x) << "\" cy=\"" << fmt2(y) << "\" r=\""
          << fmt2(style.node_radius * style.scale) << "\" fill=\"#bbbbbb\"/>\n";
    }
  }
  {
    const auto [x0, y0] = place({viewport.q_min, floor});
    const auto [x1, y1] = place({viewport.q_max, floor});
    out << "<line class=\"floor\" x1=\"" << fmt2(x0) << "\" y1=\"" << fmt2(y0) << "\" x2=\""
        << fmt2(x1) << "\" y2=\"" << fmt2(y1)
        << "\" stroke=\"#3366cc\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n";
  }
  if (!c.empty()) {
    const BoundingBox b = bounding_box(c.bodies());
    const auto [ax, ay] = place({b.q_min, b.r_min});
    const auto [bx, by] = place({b.q_max, b.r_min});
    const auto [cx, cy] = place({b.q_max, b.r_max});
    const auto [dx, dy] = place({b.q_min, b.r_max});
    out << "<polygon class=\"bbox\" points=\"" << fmt2(ax) << ',' << fmt2(ay) << ' ' << fmt2(bx)
        << ',' << fmt2(by) << ' ' << fmt2(cx) << ',' << fmt2(cy) << ' ' << fmt2(dx) << ','
        << fmt2(dy) << "\" fill=\"#cccccc\" fill-opacity=\"0.3\" stroke=\"#999999\"/>\n";
  }
  for (const auto& [v, s] : c) {
    if (!s.expansion) continue;
    const Node u = neighbor(v, *s.expansion);
    const auto [x0, y0] = place(v);
    const auto [x1, y1] = place(u);
    out << "<line class=\"expansion\" x1=\"" << fmt2(x0) << "\" y1=\"" << fmt2(y0) << "\" x2=\""
        << fmt2(x1) << "\" y2=\"" << fmt2(y1) << "\" stroke=\"#222222\" stroke-width=\""
        << fmt2(0.2 * style.scale) << "\" stroke-linecap=\"round\"/>\n";
    if (!occupied(c, u)) {
      out << "<circle class=\"semi\" cx=\"" << fmt2(x1) << "\" cy=\"" << fmt2(y1) << "\" r=\""
          << fmt2(style.particle_radius * style.scale)
          << "\" fill=\"none\" stroke=\"#222222\" stroke-dasharray=\"3,3\"/>\n";
    }
  }
  for (const auto& [v, s] : c) {
    const auto [x, y] = place(v);
    out << "<circle class=\"particle\" cx=\"" << fmt2(x) << "\" cy=\"" << fmt2(y) << "\" r=\""
        << fmt2(style.particle_radius * style.scale) << "\" fill=\""
        << (s.expansion ? "#d9534f" : "#333333") << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

inline std::string render_svg(const Configuration& c, Coord floor) {
  return render_svg(c, floor, bounding_box(c.bodies()));
}

// One frame per configuration of the trace (initial first), on a shared
// viewport covering every body and expansion target.
inline std::vector<std::string> render_trace_frames(const Trace& t) {
  std::vector<Configuration> configs{t.initial};
  for (const StepRecord& r : t.records) configs.push_back(configuration_from_key(r.config));
  BoundingBox view = bounding_box(t.initial.bodies());
  for (const auto& c : configs) {
    for (const auto& [v, s] : c) {
      view = view.extended(v);
      if (s.expansion) view = view.extended(neighbor(v, *s.expansion));
    }
  }
  std::vector<std::string> frames;
  frames.reserve(configs.size());
  for (const auto& c : configs) frames.push_back(render_svg(c, t.floor, view));
  return frames;
}

}  // namespace silbot
