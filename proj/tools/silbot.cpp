// silbot: run, check, explore, generate, serve and replay line-formation
// executions on the triangular grid.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "silbot/checkers.hpp"
#include "silbot/explorer.hpp"
#include "silbot/generate.hpp"
#include "silbot/http_service.hpp"
#include "silbot/io.hpp"
#include "silbot/scheduler.hpp"
#include "silbot/session.hpp"

namespace fs = std::filesystem;
using namespace silbot;

namespace {

constexpr int kExitFailure = 1;  // errors: parse, I/O, bad arguments
constexpr int kExitVerdict = 2;  // ran fine, but the run/check/explore verdict is negative

void write_frames(const Trace& trace, const std::string& dir) {
  fs::create_directories(dir);
  const auto frames = render_trace_frames(trace);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.svg", i);
    write_file((fs::path(dir) / name).string(), frames[i]);
  }
}

void print_report(const CheckReport& report, std::ostream& out) {
  for (const auto& r : report.results) {
    out << "check " << r.name << ' ' << to_string(r.status);
    for (const auto& [k, v] : r.metrics) out << ' ' << k << '=' << v;
    if (r.witness_step) out << " witness_step=" << *r.witness_step;
    if (!r.detail.empty()) out << " detail=\"" << r.detail << '"';
    out << '\n';
  }
}

struct RunFlags {
  std::string instance;
  std::string scheduler = "sync";
  std::string adversary = "first";
  std::uint64_t seed = 0;
  std::uint64_t max_steps = 0;
  std::uint64_t max_moves = 0;
  std::uint64_t window = 0;
  std::string trace_out;
  std::string svg_dir;
  bool stale_view = false;
  bool lenient = false;
};

int cmd_run(const RunFlags& f) {
  const Configuration c0 = load_instance(f.instance);
  const SchedulerSpec sched = parse_scheduler_spec(f.scheduler, f.seed);
  if (sched.kind == SchedulerSpec::Kind::external) {
    throw std::invalid_argument("the external scheduler is driven through 'serve'");
  }
  const AdversarySpec adv = parse_adversary_spec(f.adversary, f.seed);
  if (adv.kind == AdversarySpec::Kind::external) {
    throw std::invalid_argument("the external adversary is driven through 'serve'");
  }
  RunLimits limits;
  limits.max_steps = f.max_steps;
  limits.max_moves = f.max_moves;
  limits.fairness_window = f.window;
  limits.stale_view = f.stale_view;
  limits.strict = !f.lenient;
  const Trace trace = run(c0, sched, adv, limits);
  if (!f.trace_out.empty()) write_file(f.trace_out, write_trace(trace));
  if (!f.svg_dir.empty()) write_frames(trace, f.svg_dir);
  const RunSummary& s = trace.summary;
  std::cout << "n=" << c0.size() << " rounds=" << s.steps << " moves=" << s.moves
            << " expansions=" << s.expansions << " final=" << (s.terminated() ? "true" : "false")
            << " status=" << to_string(s.status) << '\n';
  if (!s.detail.empty()) std::cout << "detail: " << s.detail << '\n';
  return s.terminated() ? 0 : kExitVerdict;
}

struct CheckFlags {
  std::string instance;
  std::string scheduler = "serial";
  std::string adversary = "random";
  std::uint64_t runs = 100;
  std::uint64_t seed = 1;
  std::string witness_dir = ".";
  bool verbose = false;
};

int cmd_check(const CheckFlags& f) {
  const Configuration c0 = load_instance(f.instance);
  std::uint64_t failed = 0;
  for (std::uint64_t i = 0; i < f.runs; ++i) {
    SchedulerSpec sched = parse_scheduler_spec(f.scheduler, f.seed);
    sched.seed += i;
    AdversarySpec adv = parse_adversary_spec(f.adversary, f.seed);
    adv.seed += i;
    if (sched.kind == SchedulerSpec::Kind::external || adv.kind == AdversarySpec::Kind::external) {
      throw std::invalid_argument("check needs non-external scheduler and adversary");
    }
    const Trace trace = run(c0, sched, adv);
    CheckReport report = check_all(trace);
    report.results.push_back(check_fairness(trace, RunLimits{}.window_for(c0.size())));
    if (f.verbose) {
      std::cout << "run " << i << " scheduler=" << sched.to_string() << '\n';
      print_report(report, std::cout);
    }
    if (!report.passed()) {
      ++failed;
      fs::create_directories(f.witness_dir);
      const std::string path =
          (fs::path(f.witness_dir) / ("witness_run" + std::to_string(i) + ".jsonl")).string();
      write_file(path, write_trace(trace));
      std::cout << "run " << i << " FAILED (scheduler=" << sched.to_string() << "), witness trace: "
                << path << '\n';
      print_report(report, std::cout);
    }
  }
  std::cout << "runs=" << f.runs << " passed=" << f.runs - failed << " failed=" << failed << '\n';
  return failed ? kExitVerdict : 0;
}

struct ExploreFlags {
  std::string instance;
  std::size_t sweep = 0;
  std::string mode = "serial";
  std::uint64_t max_states = 10'000'000;
  std::size_t max_n = 0;
  std::string counterexample_out;
};

int cmd_explore(const ExploreFlags& f) {
  auto mode = parse_explore_mode(f.mode);
  if (!mode) throw std::invalid_argument("mode must be serial or all_subsets");
  ExploreOptions opts;
  opts.mode = *mode;
  opts.max_states = f.max_states;
  opts.max_n = f.max_n;
  std::vector<Configuration> instances;
  if (f.sweep) {
    if (f.sweep > opts.n_bound()) {
      throw std::invalid_argument("sweep n = " + std::to_string(f.sweep) + " exceeds the bound " +
                                  std::to_string(opts.n_bound()) + " for " + f.mode + " mode");
    }
    instances = enumerate_initial(f.sweep);
  } else if (!f.instance.empty()) {
    instances.push_back(load_instance(f.instance));
  } else {
    throw std::invalid_argument("give --instance or --sweep");
  }
  std::uint64_t bad = 0;
  for (const Configuration& c : instances) {
    const ExploreResult r = explore(c, opts);
    std::cout << "instance \"" << canonical_key(c) << "\" states=" << r.states_visited
              << " terminals=" << r.terminal_states.size() << " max_moves=" << r.max_moves_over_paths
              << " max_path=" << r.max_path_length
              << (r.ok() ? " ok" : r.budget_exhausted ? " BUDGET_EXHAUSTED" : " VIOLATION") << '\n';
    if (!r.violation.empty()) std::cout << "  violation: " << r.violation << '\n';
    if (r.counterexample && !f.counterexample_out.empty() && bad == 0) {
      write_file(f.counterexample_out, write_trace(*r.counterexample));
      std::cout << "  counterexample trace: " << f.counterexample_out << '\n';
    }
    if (!r.ok()) ++bad;
  }
  std::cout << "instances=" << instances.size() << " verified=" << instances.size() - bad
            << " failed=" << bad << '\n';
  return bad ? kExitVerdict : 0;
}

int cmd_gen(const std::string& shape_name, std::size_t n, std::uint64_t seed, const std::string& out) {
  auto shape = parse_shape(shape_name);
  if (!shape) throw std::invalid_argument("shape must be hex, vline, hline or random");
  const Configuration c = generate(*shape, n, seed);
  std::string comment = "shape=" + shape_name;
  if (*shape == Shape::random) comment += " seed=" + std::to_string(seed);
  const std::string text = render_instance(c, comment);
  if (out.empty()) std::cout << text;
  else write_file(out, text);
  return 0;
}

int cmd_serve(const std::string& host, int port, bool stdio) {
  SessionManager sessions;
  if (stdio) {
    std::string line;
    while (std::getline(std::cin, line)) {
      if (line.empty()) continue;
      std::cout << sessions.handle_line(line) << '\n' << std::flush;
    }
    return 0;
  }
  httplib::Server server;
  mount_session_routes(server, sessions);
  std::cerr << "serving session protocol on http://" << host << ':' << port << "/session\n";
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
    return kExitFailure;
  }
  return 0;
}

int cmd_replay(const std::string& path, const std::string& svg_dir, bool strict) {
  const Trace trace = load_trace(path);
  const ReplayResult rr = replay(trace);
  if (!rr.ok) {
    std::cout << "replay DIVERGED";
    if (rr.divergent_step) std::cout << " at step " << *rr.divergent_step;
    std::cout << ": " << rr.message << '\n';
    return kExitVerdict;
  }
  std::cout << "replay ok steps=" << trace.records.size() << '\n';
  const CheckReport report = check_all(trace);
  print_report(report, std::cout);
  if (!svg_dir.empty()) write_frames(trace, svg_dir);
  return strict && !report.passed() ? kExitVerdict : 0;
}

int cmd_inspect(const std::string& instance, const std::vector<std::string>& nodes) {
  const Configuration c = load_instance(instance);
  std::vector<Node> targets;
  if (nodes.empty()) {
    targets = c.bodies();
  } else {
    for (const auto& s : nodes) {
      const auto comma = s.find(',');
      if (comma == std::string::npos) throw std::invalid_argument("node must be q,r");
      targets.push_back({std::stoll(s.substr(0, comma)), std::stoll(s.substr(comma + 1))});
    }
  }
  for (Node v : targets) {
    json j = {{"node", json::array({v.q, v.r})},
              {"occupied", occupied(c, v)},
              {"semi_occupied", semi_occupied(c, v)},
              {"predicates", Session::predicates_json(c, v)}};
    if (auto s = c.state_at(v); s && s->is_contracted()) j["decision"] = to_string(decide(c, v));
    std::cout << j.dump() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Line formation by silent particles on the triangular grid"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Run one execution and write its trace");
  run_cmd->add_option("-i,--instance", run_flags.instance, "Instance file")->required();
  run_cmd->add_option("-s,--scheduler", run_flags.scheduler, "sync | serial:SEED | subset:SEED:P")
      ->capture_default_str();
  run_cmd->add_option("-a,--adversary", run_flags.adversary, "first | random:SEED")->capture_default_str();
  run_cmd->add_option("--seed", run_flags.seed, "Seed used when a spec omits one");
  run_cmd->add_option("--max-steps", run_flags.max_steps, "Round limit (default 64 n^2)");
  run_cmd->add_option("--max-moves", run_flags.max_moves, "Move limit (default none)");
  run_cmd->add_option("--window", run_flags.window, "Fairness window in rounds (default 2n)");
  run_cmd->add_option("-o,--trace-out", run_flags.trace_out, "Trace file to write");
  run_cmd->add_option("--svg-dir", run_flags.svg_dir, "Directory for one SVG frame per round");
  run_cmd->add_flag("--stale-view", run_flags.stale_view, "Split activations into Look and Act");
  run_cmd->add_flag("--lenient", run_flags.lenient, "Accept any valid configuration as start");

  CheckFlags check_flags;
  auto* check_cmd = app.add_subcommand("check", "Run randomised executions and check each trace");
  check_cmd->add_option("-i,--instance", check_flags.instance, "Instance file")->required();
  check_cmd->add_option("--runs", check_flags.runs, "Number of runs")->capture_default_str();
  check_cmd->add_option("-s,--scheduler", check_flags.scheduler, "serial | subset:SEED:P | sync")
      ->capture_default_str();
  check_cmd->add_option("-a,--adversary", check_flags.adversary, "first | random")->capture_default_str();
  check_cmd->add_option("--seed", check_flags.seed, "Base seed; run i uses seed + i")->capture_default_str();
  check_cmd->add_option("--witness-dir", check_flags.witness_dir, "Where failing traces go");
  check_cmd->add_flag("-v,--verbose", check_flags.verbose, "Print every report");

  ExploreFlags explore_flags;
  auto* explore_cmd = app.add_subcommand("explore", "Exhaustively explore all schedules");
  auto* inst_opt = explore_cmd->add_option("-i,--instance", explore_flags.instance, "Instance file");
  auto* sweep_opt =
      explore_cmd->add_option("--sweep", explore_flags.sweep, "Explore every initial shape of n particles");
  inst_opt->excludes(sweep_opt);
  explore_cmd->add_option("-m,--mode", explore_flags.mode, "serial | all_subsets")->capture_default_str();
  explore_cmd->add_option("--max-states", explore_flags.max_states, "State budget")->capture_default_str();
  explore_cmd->add_option("--max-n", explore_flags.max_n, "Override the particle-count bound");
  explore_cmd->add_option("--counterexample-out", explore_flags.counterexample_out,
                          "Trace file for the first counterexample");

  std::string gen_shape = "hex", gen_out;
  std::size_t gen_n = 7;
  std::uint64_t gen_seed = 0;
  auto* gen_cmd = app.add_subcommand("gen", "Generate an instance file");
  gen_cmd->add_option("--shape", gen_shape, "hex | vline | hline | random")->capture_default_str();
  gen_cmd->add_option("-n", gen_n, "Number of particles")->capture_default_str();
  gen_cmd->add_option("--seed", gen_seed, "Seed for random shapes");
  gen_cmd->add_option("-o,--out", gen_out, "Output file (default stdout)");

  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  bool serve_stdio = false;
  auto* serve_cmd = app.add_subcommand("serve", "Serve interactive stepping sessions");
  serve_cmd->add_option("--port", serve_port, "HTTP port")->capture_default_str();
  serve_cmd->add_option("--host", serve_host, "Bind address")->capture_default_str();
  serve_cmd->add_flag("--stdio", serve_stdio, "Newline-delimited JSON on stdin/stdout instead of HTTP");

  std::string replay_trace, replay_svg;
  bool replay_strict = false;
  auto* replay_cmd = app.add_subcommand("replay", "Re-execute and re-check a trace");
  replay_cmd->add_option("-t,--trace", replay_trace, "Trace file")->required();
  replay_cmd->add_option("--svg-dir", replay_svg, "Directory for SVG frames");
  replay_cmd->add_flag("--strict", replay_strict, "Also fail when a check fails");

  std::string inspect_instance;
  std::vector<std::string> inspect_nodes;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print view predicates at nodes of an instance");
  inspect_cmd->add_option("-i,--instance", inspect_instance, "Instance file")->required();
  inspect_cmd->add_option("--node", inspect_nodes, "q,r (repeatable; default every particle)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run_flags);
    if (*check_cmd) return cmd_check(check_flags);
    if (*explore_cmd) return cmd_explore(explore_flags);
    if (*gen_cmd) return cmd_gen(gen_shape, gen_n, gen_seed, gen_out);
    if (*serve_cmd) return cmd_serve(serve_host, serve_port, serve_stdio);
    if (*replay_cmd) return cmd_replay(replay_trace, replay_svg, replay_strict);
    if (*inspect_cmd) return cmd_inspect(inspect_instance, inspect_nodes);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
