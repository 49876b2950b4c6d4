// c4sbp: play, evaluate and verify the scenario-based Connect4 agent.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "connect4/agent.hpp"
#include "connect4/config.hpp"
#include "connect4/match.hpp"
#include "connect4/opponents.hpp"
#include "connect4/service.hpp"
#include "connect4/verification.hpp"
#include "sbp/engine.hpp"
#include "sbp/trace_io.hpp"

namespace {

using namespace connect4;
namespace fs = std::filesystem;

constexpr int kUsage = 64;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config_path;
  std::uint64_t seed = 1;
  std::string tie_break = "event-order";
  std::string log_level = "warn";
  std::string board = "6x7";
};

AgentConfig make_config(const Globals& g) {
  AgentConfig c;
  c.geometry = parse_geometry(g.board);
  if (!g.config_path.empty()) c = load_config(g.config_path, c);
  if (g.tie_break == "random") {
    c.tie_break = sbp::SeededRandom{g.seed};
  } else if (g.tie_break != "event-order") {
    throw UsageError("--tie-break must be event-order or random");
  }
  return c;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

sbp::Trace read_trace(const fs::path& path) {
  try {
    return sbp::parse_jsonl(read_file(path));
  } catch (const sbp::TraceFormatError& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

/// Placements of a prefix file; input prompts are dropped, anything else
/// is rejected with its line number.
std::vector<Event> read_prefix(const fs::path& path, const Geometry& g) {
  const auto trace = read_trace(path);
  std::vector<Event> out;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& e = trace.events[i];
    if (e == request_user_input_event()) continue;
    const auto p = decode_placement(e);
    if (!p || !g.contains(p->pos)) {
      throw UsageError(path.string() + ": line " + std::to_string(i + 1) + ": not a placement: " + e.to_string());
    }
    out.push_back(e);
  }
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

class TerminalProvider final : public InputProvider {
 public:
  std::optional<int> next_column(const Board& board) override {
    std::cout << '\n' << board.ascii();
    while (true) {
      std::cout << "red column> " << std::flush;
      std::string line;
      if (!std::getline(std::cin, line)) return std::nullopt;
      int col = 0;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto [ptr, ec] = std::from_chars(line.data() + first, line.data() + line.size(), col);
      if (ec != std::errc{} || line.find_first_not_of(" \t\r", static_cast<std::size_t>(ptr - line.data())) !=
                                   std::string::npos) {
        std::cout << "enter a column number\n";
        continue;
      }
      return col;
    }
  }
  void rejected(int column, std::string_view reason) override {
    std::cout << "column " << column << " rejected: " << reason << '\n';
  }
};

int cmd_play(const Globals& g) {
  const auto config = make_config(g);
  auto provider = std::make_shared<TerminalProvider>();
  const auto program = build_agent_program(config, InteractiveRed{provider});
  sbp::RunOptions opts;
  opts.on_step = [](std::size_t, const sbp::SelectionOutcome& o) {
    if (auto p = decode_placement(*o.selected); p && p->color == Color::Yellow) {
      std::cout << "yellow plays column " << p->pos.col << " (" << o.explanation << ")\n";
    }
  };
  const auto run = sbp::run(program, opts);
  std::cout << '\n' << board_after(run.trace, config.geometry).ascii();
  switch (trace_result(run.trace)) {
    case MatchResult::YellowWin: std::cout << "Yellow wins\n"; return 0;
    case MatchResult::RedWin: std::cout << "Red wins\n"; return 0;
    case MatchResult::Draw: std::cout << "Draw\n"; return 0;
    case MatchResult::Unfinished: break;
  }
  std::cout << "game abandoned\n";
  return 1;
}

struct MatchFlags {
  std::string opponent = "random";
  int depth = 4;
  int games = 200;
  std::string out;
};

int cmd_match(const Globals& g, const MatchFlags& f) {
  const auto config = make_config(g);
  PolicySpec spec;
  if (f.opponent == "random") {
    spec = random_spec();
  } else if (f.opponent == "minimax") {
    if (f.depth < 1) throw UsageError("--depth must be at least 1");
    spec = minimax_spec(f.depth);
  } else {
    throw UsageError("unknown opponent '" + f.opponent + "' (random, minimax)");
  }
  if (f.games < 1) throw UsageError("--games must be positive");
  auto report = run_tournament(config, {spec}, static_cast<std::size_t>(f.games), g.seed);
  if (!f.out.empty()) {
    store_traces(report, f.out);
    write_file(fs::path(f.out) / "report.json", to_json(report).dump(2) + "\n");
  }
  std::cout << summary_table(report);
  for (const auto& game : report.games) {
    if (game.fault) spdlog::error("{} seed {}: {}", game.policy, game.seed.value_or(0), *game.fault);
  }
  return report.has_faults() ? 1 : 0;
}

struct VerifyFlags {
  std::string property = "no-illegal-move";
  std::string prefix_file;
  std::string branching = "max-priority";
  std::optional<std::size_t> max_depth;
  std::size_t max_states = 1'000'000;
  std::vector<std::string> disable;
  std::string counterexample_out = "counterexample.jsonl";
};

int cmd_verify(const Globals& g, const VerifyFlags& f) {
  auto config = make_config(g);
  for (const auto& name : f.disable) {
    bool found = false;
    StrategyGroups::for_each(config.groups, [&](std::string_view n, bool& on) {
      if (n == name) {
        on = false;
        found = true;
      }
    });
    if (!found) throw UsageError("unknown strategy group '" + name + "'");
  }
  VerifyOptions vo;
  const auto property = parse_property(f.property);
  if (!property) throw UsageError("unknown property '" + f.property + "'");
  vo.property = *property;
  if (f.branching == "max-priority") {
    vo.branching = sbp::Branching::MaxPriorityEligible;
  } else if (f.branching == "all") {
    vo.branching = sbp::Branching::AllEligible;
  } else {
    throw UsageError("--branching must be max-priority or all");
  }
  vo.max_depth = f.max_depth;
  vo.max_states = f.max_states;
  const auto prefix = f.prefix_file.empty() ? std::vector<Event>{} : read_prefix(f.prefix_file, config.geometry);

  const auto result = sbp::explore(verification_task(config, vo, prefix));
  auto summary = sbp::summary_json(result);
  summary["property"] = to_string(vo.property);
  summary["board"] = geometry_string(config.geometry);
  summary["prefixLength"] = prefix.size();
  if (result.counterexample) {
    write_file(f.counterexample_out, sbp::to_jsonl(*result.counterexample));
    summary["counterexample"] = f.counterexample_out;
    summary["counterexampleLength"] = result.counterexample->size();
  }
  std::cout << summary.dump() << '\n';
  switch (result.verdict) {
    case sbp::Verdict::Safe: return 0;
    case sbp::Verdict::Counterexample: return 1;
    case sbp::Verdict::BoundExceeded: return 2;
  }
  return 2;
}

struct ReplayFlags {
  std::string trace;
  std::string prefix_file;
  std::string mode = "tie-break";
};

int cmd_replay(const Globals& g, const ReplayFlags& f) {
  const auto config = make_config(g);
  const auto trace = read_trace(f.trace);
  const auto prefix = f.prefix_file.empty() ? std::vector<Event>{} : read_prefix(f.prefix_file, config.geometry);
  sbp::ReplayMode mode;
  if (f.mode == "tie-break") {
    mode = sbp::ReplayMode::TieBreak;
  } else if (f.mode == "eligible") {
    mode = sbp::ReplayMode::Eligible;
  } else {
    throw UsageError("--mode must be tie-break or eligible");
  }
  const auto r = sbp::replay(program_for_trace(config, trace, prefix), trace, mode);
  nlohmann::json out{{"ok", r.ok}, {"events", trace.size()}, {"result", to_string(trace_result(trace))}};
  if (!r.ok) out["divergence"] = {{"step", *r.divergence}, {"reason", r.reason}};
  std::cout << out.dump() << '\n' << board_after(trace, config.geometry).ascii();
  return r.ok ? 0 : 1;
}

struct ServeFlags {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  std::string persist;
  int ttl = 3600;
};

httplib::Server* g_server = nullptr;

int cmd_serve(const Globals& g, const ServeFlags& f) {
  service::ServiceOptions so;
  so.config = make_config(g);
  so.ttl = std::chrono::seconds(f.ttl);
  if (!f.persist.empty()) so.persist_path = f.persist;
  if (!f.static_dir.empty()) so.static_dir = f.static_dir;
  service::GameService svc(so);
  httplib::Server server;
  svc.mount(server);
  g_server = &server;
  std::signal(SIGINT, [](int) { g_server->stop(); });
  std::signal(SIGTERM, [](int) { g_server->stop(); });
  spdlog::info("listening on {}:{}", f.host, f.port);
  if (!server.listen(f.host, f.port)) {
    spdlog::error("cannot listen on {}:{}", f.host, f.port);
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario-based Connect4 agent"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "strategy config file (JSON)")->envname("C4SBP_CONFIG");
  app.add_option("--seed", g.seed, "base seed")->envname("C4SBP_SEED");
  app.add_option("--tie-break", g.tie_break, "event-order or random")->envname("C4SBP_TIE_BREAK");
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error, off")->envname("C4SBP_LOG_LEVEL");
  app.add_option("--board", g.board, "RxC or RxCxL, e.g. 6x7 or 4x4x3")->envname("C4SBP_BOARD");

  auto* play = app.add_subcommand("play", "play red against the agent on the terminal");

  MatchFlags mf;
  auto* match = app.add_subcommand("match", "agent against a scripted opponent");
  match->add_option("--opponent", mf.opponent, "random or minimax");
  match->add_option("--depth", mf.depth, "minimax depth");
  match->add_option("--games", mf.games, "games against seeded opponents");
  match->add_option("--out", mf.out, "directory for report.json and traces");

  VerifyFlags vf;
  auto* verify = app.add_subcommand("verify", "model-check the agent against adversarial red");
  verify->add_option("--property", vf.property, "no-illegal-move, red-never-wins or yellow-always-wins");
  verify->add_option("--prefix-file", vf.prefix_file, "JSONL opening to force");
  verify->add_option("--branching", vf.branching, "max-priority or all");
  verify->add_option("--max-depth", vf.max_depth, "path length bound");
  verify->add_option("--max-states", vf.max_states, "state budget");
  verify->add_option("--disable", vf.disable, "strategy group to switch off")->take_all();
  verify->add_option("--counterexample-out", vf.counterexample_out, "where to write a counterexample");

  ReplayFlags rf;
  auto* replay = app.add_subcommand("replay", "check that a trace replays");
  replay->add_option("trace", rf.trace, "JSONL trace")->required();
  replay->add_option("--prefix-file", rf.prefix_file, "forced opening the trace was produced with");
  replay->add_option("--mode", rf.mode, "tie-break or eligible");

  ServeFlags sf;
  auto* serve = app.add_subcommand("serve", "HTTP game service");
  serve->add_option("--host", sf.host)->envname("C4SBP_HOST");
  serve->add_option("--port", sf.port)->envname("C4SBP_PORT");
  serve->add_option("--static-dir", sf.static_dir, "web assets to serve at /")->envname("C4SBP_STATIC_DIR");
  serve->add_option("--persist", sf.persist, "append finished games to this JSONL file")->envname("C4SBP_PERSIST");
  serve->add_option("--ttl", sf.ttl, "idle session lifetime in seconds")->envname("C4SBP_TTL");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  spdlog::set_level(spdlog::level::from_str(g.log_level));
  try {
    if (*play) return cmd_play(g);
    if (*match) return cmd_match(g, mf);
    if (*verify) return cmd_verify(g, vf);
    if (*replay) return cmd_replay(g, rf);
    if (*serve) return cmd_serve(g, sf);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return 70;
  }
  return kUsage;
}
