#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "connect4/agent.hpp"
#include "connect4/opponents.hpp"
#include "sbp/engine.hpp"
#include "sbp/trace_io.hpp"

namespace connect4 {

enum class MatchResult { YellowWin, RedWin, Draw, Unfinished };

inline const char* to_string(MatchResult r) {
  switch (r) {
    case MatchResult::YellowWin: return "yellow_win";
    case MatchResult::RedWin: return "red_win";
    case MatchResult::Draw: return "draw";
    case MatchResult::Unfinished: return "unfinished";
  }
  return "?";
}

/// Result implied by a trace's terminal event.
inline MatchResult trace_result(const sbp::Trace& trace) {
  for (const auto& e : trace.events) {
    if (e == win_event(Color::Yellow)) return MatchResult::YellowWin;
    if (e == win_event(Color::Red)) return MatchResult::RedWin;
    if (e == draw_event()) return MatchResult::Draw;
  }
  return MatchResult::Unfinished;
}

/// Board after folding the trace's placements.
inline Board board_after(const sbp::Trace& trace, const Geometry& g = {}) {
  Board b(g);
  for (const auto& e : trace.events) {
    if (auto p = decode_placement(e)) b.set(p->pos, cell_of(p->color));
  }
  return b;
}

/// Columns of red's placements, in trace order.
inline std::vector<int> red_columns(const sbp::Trace& trace) {
  std::vector<int> out;
  for (const auto& e : trace.events) {
    if (auto p = decode_placement(e); p && p->color == Color::Red) out.push_back(p->pos.col);
  }
  return out;
}

/// A program able to reproduce `trace`: recorded games (which contain
/// RequestUserInput) get a scripted red, verifier traces adversarial red.
inline Program program_for_trace(const AgentConfig& config, const sbp::Trace& trace,
                                 const std::vector<Event>& prefix = {}) {
  const bool interactive = std::ranges::find(trace.events, request_user_input_event()) != trace.events.end();
  if (!interactive) return build_agent_program(config, AdversarialRed{}, prefix);
  return build_agent_program(config, InteractiveRed{std::make_shared<ScriptedProvider>(red_columns(trace))}, prefix);
}

struct MatchRecord {
  std::string policy;
  std::optional<std::uint64_t> seed;
  MatchResult result = MatchResult::Unfinished;
  int move_count = 0;
  sbp::Trace trace;
  std::string trace_path;
  /// Engine fault text; the game is then not scored.
  std::optional<std::string> fault;
};

/// One game, agent as yellow moving first, `policy` as red.
inline MatchRecord play_match(const AgentConfig& config, const Policy& policy, int max_moves = 42) {
  MatchRecord rec{policy.name, policy.seed};
  auto provider = std::make_shared<PolicyProvider>(policy);
  const Program program = build_agent_program(config, InteractiveRed{provider});
  sbp::RunOptions opts;
  // every move can be preceded by RequestUserInput, plus one terminal event
  opts.max_steps = static_cast<std::size_t>(2 * max_moves + 1);
  try {
    auto run = sbp::run(program, opts);
    rec.trace = std::move(run.trace);
  } catch (const sbp::ThreadFault& f) {
    rec.fault = f.what();
    return rec;
  }
  rec.result = trace_result(rec.trace);
  for (const auto& e : rec.trace.events) rec.move_count += decode_placement(e).has_value();
  return rec;
}

struct Tally {
  int w = 0, d = 0, l = 0, unfinished = 0, faults = 0;
  int games() const noexcept { return w + d + l + unfinished + faults; }
};

struct MatchReport {
  std::vector<MatchRecord> games;
  /// Keyed by policy name; w/d/l from yellow's point of view.
  std::map<std::string, Tally> summary;

  bool has_faults() const {
    for (const auto& g : games) {
      if (g.fault) return true;
    }
    return false;
  }
};

/// Deterministic policies play once; seeded ones play `games_per_policy`
/// games with seeds base_seed, base_seed + 1, ...
struct PolicySpec {
  std::string name;
  std::function<Policy(std::uint64_t seed)> make;
  bool deterministic = false;
};

inline PolicySpec random_spec() { return {"random", [](std::uint64_t s) { return random_policy(s); }, false}; }
inline PolicySpec minimax_spec(int depth) {
  return {"minimax" + std::to_string(depth), [depth](std::uint64_t) { return minimax_policy(depth); }, true};
}

inline MatchReport run_tournament(const AgentConfig& config, const std::vector<PolicySpec>& policies,
                                  int games_per_policy, std::uint64_t base_seed = 1) {
  MatchReport report;
  for (const auto& spec : policies) {
    const int n = spec.deterministic ? 1 : games_per_policy;
    auto& tally = report.summary[spec.name];
    for (int i = 0; i < n; ++i) {
      const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
      Policy p = spec.make(seed);
      p.name = spec.name;
      auto rec = play_match(config, p, config.geometry.capacity());
      if (rec.fault) {
        ++tally.faults;
      } else {
        switch (rec.result) {
          case MatchResult::YellowWin: ++tally.w; break;
          case MatchResult::RedWin: ++tally.l; break;
          case MatchResult::Draw: ++tally.d; break;
          case MatchResult::Unfinished: ++tally.unfinished; break;
        }
      }
      report.games.push_back(std::move(rec));
    }
  }
  return report;
}

/// Writes each trace as <dir>/<policy>-<index>.jsonl and records the path.
inline void store_traces(MatchReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < report.games.size(); ++i) {
    auto& g = report.games[i];
    const auto path = dir / fmt::format("{}-{:04d}.jsonl", g.policy, i);
    std::ofstream(path) << sbp::to_jsonl(g.trace);
    g.trace_path = path.string();
  }
}

inline nlohmann::json to_json(const MatchReport& report) {
  nlohmann::json games = nlohmann::json::array();
  for (const auto& g : report.games) {
    nlohmann::json j{{"policy", g.policy},
                     {"result", to_string(g.result)},
                     {"moveCount", g.move_count},
                     {"trace", g.trace_path}};
    j["seed"] = g.seed ? nlohmann::json(*g.seed) : nlohmann::json(nullptr);
    if (g.fault) j["fault"] = *g.fault;
    games.push_back(std::move(j));
  }
  nlohmann::json summary = nlohmann::json::object();
  for (const auto& [name, t] : report.summary) {
    summary[name] = {{"w", t.w}, {"d", t.d}, {"l", t.l}};
    if (t.unfinished) summary[name]["unfinished"] = t.unfinished;
    if (t.faults) summary[name]["faults"] = t.faults;
  }
  return {{"games", std::move(games)}, {"summary", std::move(summary)}};
}

inline std::string summary_table(const MatchReport& report) {
  std::string out = fmt::format("{:<12} {:>5} {:>5} {:>5} {:>6}\n", "policy", "W", "D", "L", "games");
  for (const auto& [name, t] : report.summary) {
    out += fmt::format("{:<12} {:>5} {:>5} {:>5} {:>6}\n", name, t.w, t.d, t.l, t.games());
  }
  return out;
}

}  // namespace connect4
