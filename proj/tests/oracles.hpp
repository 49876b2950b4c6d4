#pragma once

// Reference implementations used only by tests. They deliberately avoid
// the library's selection, line and board helpers.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "connect4/events.hpp"
#include "sbp/engine.hpp"
#include "sbp/program.hpp"

namespace oracle {

// ---- selection -------------------------------------------------------------

struct Statement {
  std::vector<int> wait, request, soft, hard;
  std::int64_t request_priority = 0;
  std::int64_t block_priority = 0;
};

/// One thread's declaration: a list of statements.
using Declaration = std::vector<Statement>;

struct Instance {
  std::vector<sbp::Event> events;
  std::vector<Declaration> threads;
};

/// Selection by the three rules, read literally: requested by someone;
/// if blocked, requested above every block on it (never when hard
/// blocked); then highest request. Returns all winners, sorted by event.
inline std::vector<int> naive_winners(const Instance& in) {
  struct Candidate {
    int event;
    std::int64_t priority;
  };
  std::vector<Candidate> ok;
  for (int e = 0; e < static_cast<int>(in.events.size()); ++e) {
    bool requested = false;
    std::int64_t best_request = 0;
    bool hard = false;
    bool soft = false;
    std::int64_t worst_block = 0;
    for (const auto& d : in.threads) {
      for (const auto& s : d) {
        auto has = [e](const std::vector<int>& v) { return std::find(v.begin(), v.end(), e) != v.end(); };
        if (has(s.request)) {
          if (!requested || s.request_priority > best_request) best_request = s.request_priority;
          requested = true;
        }
        if (has(s.hard)) hard = true;
        if (has(s.soft)) {
          if (!soft || s.block_priority > worst_block) worst_block = s.block_priority;
          soft = true;
        }
      }
    }
    if (!requested || hard) continue;
    if (soft && !(best_request > worst_block)) continue;
    ok.push_back({e, best_request});
  }
  std::vector<int> winners;
  if (ok.empty()) return winners;
  std::int64_t top = ok.front().priority;
  for (const auto& c : ok) top = std::max(top, c.priority);
  for (const auto& c : ok) {
    if (c.priority == top) winners.push_back(c.event);
  }
  std::sort(winners.begin(), winners.end(),
            [&](int a, int b) { return in.events[static_cast<std::size_t>(a)] < in.events[static_cast<std::size_t>(b)]; });
  return winners;
}

/// Classical semantics: any event requested and blocked by nobody.
inline std::set<int> classical_selectable(const Instance& in) {
  std::set<int> requested, blocked;
  for (const auto& d : in.threads) {
    for (const auto& s : d) {
      requested.insert(s.request.begin(), s.request.end());
      blocked.insert(s.hard.begin(), s.hard.end());
      blocked.insert(s.soft.begin(), s.soft.end());
    }
  }
  std::set<int> out;
  for (int e : requested) {
    if (!blocked.count(e)) out.insert(e);
  }
  return out;
}

struct GenLimits {
  int max_threads = 8;
  int max_events = 12;
  int min_priority = -5;
  int max_priority = 5;
  int max_statements = 3;
  bool classical = false;
};

/// Event names and payloads vary so that the total order is exercised on
/// both fields.
inline std::vector<sbp::Event> random_events(std::mt19937_64& rng, int n) {
  static const char* names[] = {"a", "b", "Hot", "Cold", "PlaceRed", "PlaceYellow"};
  std::set<sbp::Event> seen;
  std::vector<sbp::Event> out;
  std::uniform_int_distribution<int> name(0, 5), kind(0, 3), small(0, 6);
  while (static_cast<int>(out.size()) < n) {
    sbp::Payload p;
    switch (kind(rng)) {
      case 0: break;
      case 1: p.emplace("col", std::int64_t{small(rng)}); break;
      case 2:
        p.emplace("row", std::int64_t{small(rng)});
        p.emplace("col", std::int64_t{small(rng)});
        break;
      default: p.emplace("color", std::string(small(rng) % 2 ? "Y" : "R")); break;
    }
    sbp::Event e(names[name(rng)], std::move(p));
    if (seen.insert(e).second) out.push_back(std::move(e));
  }
  return out;
}

inline Instance random_instance(std::mt19937_64& rng, const GenLimits& lim) {
  Instance in;
  std::uniform_int_distribution<int> nthreads(0, lim.max_threads), nevents(1, lim.max_events);
  std::uniform_int_distribution<int> nstat(1, lim.max_statements);
  std::uniform_int_distribution<int> prio(lim.min_priority, lim.max_priority);
  std::uniform_real_distribution<double> u(0, 1);
  in.events = random_events(rng, nevents(rng));
  const int n = static_cast<int>(in.events.size());
  const int t = nthreads(rng);
  for (int i = 0; i < t; ++i) {
    Declaration d;
    const int k = lim.classical ? 1 : nstat(rng);
    for (int j = 0; j < k; ++j) {
      Statement s;
      if (!lim.classical) {
        s.request_priority = prio(rng);
        s.block_priority = prio(rng);
      }
      for (int e = 0; e < n; ++e) {
        const double x = u(rng);
        if (x < 0.25) {
          s.request.push_back(e);
        } else if (x < 0.32) {
          s.hard.push_back(e);
        } else if (x < 0.45 && !lim.classical) {
          s.soft.push_back(e);
        } else if (x < 0.55) {
          s.wait.push_back(e);
        }
      }
      // a statement may also soft-block what it requests
      if (!lim.classical && !s.request.empty() && u(rng) < 0.2) s.soft.push_back(s.request.front());
      d.push_back(std::move(s));
    }
    in.threads.push_back(std::move(d));
  }
  return in;
}

/// Interns the instance and rebuilds it as library declarations.
struct Lowered {
  std::shared_ptr<sbp::EventRegistry> registry = std::make_shared<sbp::EventRegistry>();
  std::vector<sbp::EventId> ids;
  std::vector<sbp::MultiSync> syncs;
  std::vector<std::string> names;

  explicit Lowered(const Instance& in) {
    for (const auto& e : in.events) ids.push_back(registry->intern(e));
    auto set = [&](const std::vector<int>& v) {
      std::vector<sbp::EventId> out;
      for (int e : v) out.push_back(ids[static_cast<std::size_t>(e)]);
      return sbp::EventSet(out);
    };
    for (std::size_t i = 0; i < in.threads.size(); ++i) {
      std::vector<sbp::SyncDeclaration> statements;
      for (const auto& s : in.threads[i]) {
        statements.push_back(sbp::make_sync({.wait_for = set(s.wait),
                                             .request = set(s.request),
                                             .soft_block = set(s.soft),
                                             .hard_block = set(s.hard),
                                             .request_priority = s.request_priority,
                                             .block_priority = s.block_priority}));
      }
      syncs.emplace_back(std::move(statements));
      names.push_back("t" + std::to_string(i));
    }
  }

  std::vector<sbp::ThreadDeclaration> declarations() const {
    std::vector<sbp::ThreadDeclaration> out;
    for (std::size_t i = 0; i < syncs.size(); ++i) out.push_back({names[i], &syncs[i]});
    return out;
  }

  int index_of(sbp::EventId id) const {
    return static_cast<int>(std::find(ids.begin(), ids.end(), id) - ids.begin());
  }
};

// ---- sample programs -------------------------------------------------------

/// The hot/cold program: two unbounded requesters and an alternation
/// enforcer that waits for Hot while blocking Cold, then the reverse.
inline sbp::Program hot_cold_program(sbp::TieBreak tie = sbp::EventOrder{}) {
  auto reg = std::make_shared<sbp::EventRegistry>();
  const auto hot = reg->intern(sbp::Event("Hot"));
  const auto cold = reg->intern(sbp::Event("Cold"));
  std::vector<sbp::ScenarioThread> threads;
  threads.emplace_back("add_hot_water", sbp::ConstantBehavior{sbp::make_sync({.request = {hot}})});
  threads.emplace_back("add_cold_water", sbp::ConstantBehavior{sbp::make_sync({.request = {cold}})});
  threads.push_back(sbp::make_thread(
      "stabilize", std::uint8_t{0},
      [hot, cold](std::uint8_t s) -> sbp::Yield {
        if (s == 0) return sbp::MultiSync(sbp::make_sync({.wait_for = {hot}, .block = {cold}}));
        return sbp::MultiSync(sbp::make_sync({.wait_for = {cold}, .block = {hot}}));
      },
      [](std::uint8_t s, sbp::EventId) { return static_cast<std::uint8_t>(1 - s); }));
  return sbp::Program(reg, std::move(threads), tie);
}

// ---- Connect4 --------------------------------------------------------------

using Grid = std::vector<std::vector<char>>;  // [row][col], row 0 at the bottom

inline Grid empty_grid(int rows, int cols) { return Grid(static_cast<std::size_t>(rows), std::vector<char>(static_cast<std::size_t>(cols), '.')); }

/// Every winning line as a sorted set of (row, col), by brute force over
/// start cells and all eight step vectors.
inline std::set<std::vector<std::pair<int, int>>> brute_lines(int rows, int cols, int len) {
  std::set<std::vector<std::pair<int, int>>> out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          std::vector<std::pair<int, int>> cells;
          for (int k = 0; k < len; ++k) {
            const int rr = r + k * dr, cc = c + k * dc;
            if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) break;
            cells.emplace_back(rr, cc);
          }
          if (static_cast<int>(cells.size()) != len) continue;
          std::sort(cells.begin(), cells.end());
          out.insert(cells);
        }
      }
    }
  }
  return out;
}

/// 'Y', 'R' or '.' by walking from every cell in four directions.
inline char grid_winner(const Grid& g, int len) {
  const int rows = static_cast<int>(g.size()), cols = static_cast<int>(g[0].size());
  const int dirs[4][2] = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const char who = g[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (who == '.') continue;
      for (const auto& d : dirs) {
        int k = 1;
        while (k < len) {
          const int rr = r + k * d[0], cc = c + k * d[1];
          if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) break;
          if (g[static_cast<std::size_t>(rr)][static_cast<std::size_t>(cc)] != who) break;
          ++k;
        }
        if (k == len) return who;
      }
    }
  }
  return '.';
}

inline bool grid_full(const Grid& g) {
  for (const auto& row : g) {
    for (char c : row) {
      if (c == '.') return false;
    }
  }
  return true;
}

/// Board fold over the trace's placements, in the same row strings the
/// library prints (top row first).
inline std::vector<std::string> fold_rows(const sbp::Trace& t, int rows, int cols) {
  Grid g = empty_grid(rows, cols);
  for (const auto& e : t.events) {
    if (e.name() != "PlaceYellow" && e.name() != "PlaceRed") continue;
    const auto r = static_cast<std::size_t>(*e.int_field("row"));
    const auto c = static_cast<std::size_t>(*e.int_field("col"));
    g[r][c] = e.name() == "PlaceYellow" ? 'Y' : 'R';
  }
  std::vector<std::string> out;
  for (int r = rows - 1; r >= 0; --r) out.emplace_back(g[static_cast<std::size_t>(r)].begin(), g[static_cast<std::size_t>(r)].end());
  return out;
}

/// Scans a game trace against the rules: gravity, alternation starting
/// with yellow, Win/Draw exactly when the board calls for it, at most one
/// terminal event and nothing after it. Returns the first violation.
inline std::optional<std::string> rules_violation(const sbp::Trace& t, int rows = 6, int cols = 7, int len = 4,
                                                  bool require_finished = true) {
  Grid g = empty_grid(rows, cols);
  std::vector<int> height(static_cast<std::size_t>(cols), 0);
  char next = 'Y';
  bool over = false;
  char owed = 0;  // 'Y'/'R' for a pending Win, 'D' for Draw
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& e = t.events[i];
    const std::string at = "event " + std::to_string(i) + " " + e.to_string() + ": ";
    if (over) return at + "after the terminal event";
    if (e.name() == "Win" || e.name() == "Draw") {
      const char got = e.name() == "Draw" ? 'D' : e.string_field("color").value_or("?")[0];
      if (owed != got) return at + "terminal event not called for by the board";
      over = true;
      continue;
    }
    if (owed) return at + "terminal event missing";
    if (e.name() == "RequestUserInput") {
      if (next != 'R') return at + "input requested on yellow's turn";
      continue;
    }
    const char who = e.name() == "PlaceYellow" ? 'Y' : e.name() == "PlaceRed" ? 'R' : 0;
    if (!who) return at + "unknown event";
    const int r = static_cast<int>(*e.int_field("row")), c = static_cast<int>(*e.int_field("col"));
    if (c < 0 || c >= cols || r != height[static_cast<std::size_t>(c)]) return at + "gravity";
    if (who != next) return at + "alternation";
    g[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = who;
    ++height[static_cast<std::size_t>(c)];
    next = who == 'Y' ? 'R' : 'Y';
    const char w = grid_winner(g, len);
    if (w != '.') {
      owed = w;
    } else if (grid_full(g)) {
      owed = 'D';
    }
  }
  if (owed && !over) return std::string("trace ends before its terminal event");
  if (require_finished && !over) return std::string("game did not finish");
  return std::nullopt;
}

/// Distinct (board, finished) states reachable within `depth` events of a
/// rules-only game where both sides may play any legal column and a line
/// completion is followed by exactly one Win event.
inline std::size_t count_game_states(int rows, int cols, int len, int depth) {
  struct Key {
    std::string cells;
    bool finished;
    bool operator==(const Key&) const = default;
  };
  struct Hash {
    std::size_t operator()(const Key& k) const { return std::hash<std::string>{}(k.cells) * 2 + k.finished; }
  };
  std::unordered_map<Key, int, Hash> best;  // shallowest depth seen
  Grid g = empty_grid(rows, cols);
  auto encode = [&] {
    std::string s;
    for (const auto& row : g) s.append(row.begin(), row.end());
    return s;
  };
  auto visit = [&](auto&& self, int d, char to_move, bool finished) -> void {
    const Key k{encode(), finished};
    auto it = best.find(k);
    if (it != best.end() && it->second <= d) return;
    best[k] = d;
    if (finished || d == depth) return;
    const char w = grid_winner(g, len);
    if (w != '.' || grid_full(g)) {
      self(self, d + 1, to_move, true);
      return;
    }
    for (int c = 0; c < cols; ++c) {
      int r = 0;
      while (r < rows && g[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] != '.') ++r;
      if (r == rows) continue;
      g[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = to_move;
      self(self, d + 1, to_move == 'Y' ? 'R' : 'Y', false);
      g[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = '.';
    }
  };
  visit(visit, 0, 'Y', false);
  return best.size();
}

/// Immediately playable cells where `who` completes a line.
inline std::vector<std::pair<int, int>> completions(const Grid& g, char who, int len) {
  const int rows = static_cast<int>(g.size()), cols = static_cast<int>(g[0].size());
  std::vector<std::pair<int, int>> out;
  for (int c = 0; c < cols; ++c) {
    int r = 0;
    while (r < rows && g[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] != '.') ++r;
    if (r == rows) continue;
    Grid h = g;
    h[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = who;
    if (grid_winner(h, len) == who) out.emplace_back(r, c);
  }
  return out;
}

inline Grid grid_of(const std::vector<std::string>& rows_top_first) {
  Grid g;
  for (auto it = rows_top_first.rbegin(); it != rows_top_first.rend(); ++it) g.emplace_back(it->begin(), it->end());
  return g;
}

}  // namespace oracle
