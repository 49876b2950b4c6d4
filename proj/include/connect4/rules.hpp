#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "connect4/board.hpp"
#include "connect4/events.hpp"
#include "sbp/thread.hpp"

namespace connect4 {

using sbp::MultiSync;
using sbp::Priority;
using sbp::ScenarioThread;
using sbp::Yield;
using sbp::make_sync;

/// Priorities of the rule layer. Only the relations matter:
/// win_event above every strategy constant, draw below it, base lowest.
struct RulePriorities {
  Priority win_event = 30000;
  Priority draw = 100;
  Priority base = 0;
};

using EventsPtr = std::shared_ptr<const GameEvents>;

// ---------------------------------------------------------------------------
// board_manager

struct BoardManagerBehavior {
  using State = Board;
  EventsPtr events;
  MultiSync watch;

  explicit BoardManagerBehavior(EventsPtr ev)
      : events(std::move(ev)), watch(make_sync({.wait_for = events->all_placements()})) {}

  State initial() const { return Board(events->geometry()); }

  Yield declare(const State&) const { return watch; }

  State advance(State board, EventId e) const {
    if (const auto p = events->placement(e)) {
      if (board.at(p->pos) != Cell::Empty) {
        throw std::logic_error("placement into an occupied cell");
      }
      board.set(p->pos, cell_of(p->color));
    }
    return board;
  }
};

inline ScenarioThread board_manager_thread(EventsPtr events) {
  return ScenarioThread("board_manager", BoardManagerBehavior(std::move(events)));
}

// ---------------------------------------------------------------------------
// valid_placement: hard-blocks every placement that is not the lowest empty
// cell of its column.

struct ValidPlacementBehavior {
  using State = std::array<std::uint8_t, kMaxCols>;  // column heights
  EventsPtr events;

  State initial() const { return {}; }

  Yield declare(const State& heights) const {
    const auto& g = events->geometry();
    std::vector<EventId> blocked;
    blocked.reserve(static_cast<std::size_t>(2 * g.capacity()));
    for (int c = 0; c < g.cols; ++c) {
      for (int r = 0; r < g.rows; ++r) {
        if (r == heights[static_cast<std::size_t>(c)]) continue;
        blocked.push_back(events->place(Color::Yellow, {r, c}));
        blocked.push_back(events->place(Color::Red, {r, c}));
      }
    }
    return MultiSync(make_sync({.wait_for = events->all_placements(), .hard_block = EventSet(blocked)}));
  }

  State advance(State heights, EventId e) const {
    if (const auto p = events->placement(e)) ++heights[static_cast<std::size_t>(p->pos.col)];
    return heights;
  }
};

inline ScenarioThread valid_placement_thread(EventsPtr events) {
  return ScenarioThread("valid_placement", ValidPlacementBehavior{std::move(events)});
}

// ---------------------------------------------------------------------------
// enforce_turns: yellow first, then strict alternation.

struct EnforceTurnsBehavior {
  using State = Color;  // side to move
  EventsPtr events;
  MultiSync yellow_turn, red_turn;

  explicit EnforceTurnsBehavior(EventsPtr ev)
      : events(std::move(ev)),
        yellow_turn(make_sync({.wait_for = events->placements(Color::Yellow),
                               .hard_block = events->placements(Color::Red)})),
        red_turn(make_sync({.wait_for = events->placements(Color::Red),
                            .hard_block = events->placements(Color::Yellow)})) {}

  State initial() const { return Color::Yellow; }

  Yield declare(State to_move) const { return to_move == Color::Yellow ? yellow_turn : red_turn; }

  State advance(State to_move, EventId) const { return opponent(to_move); }
};

inline ScenarioThread enforce_turns_thread(EventsPtr events) {
  return ScenarioThread("enforce_turns", EnforceTurnsBehavior(std::move(events)));
}

// ---------------------------------------------------------------------------
// check_line_win: watches one line for one color and requests Win once all
// its cells are owned.

struct LineWinState {
  std::uint8_t seen = 0;   // bit k set once line cell k holds the color
  std::uint8_t phase = 0;  // 0 watching, 1 finished
  friend bool operator==(LineWinState, LineWinState) = default;
};

struct CheckLineWinBehavior {
  using State = LineWinState;
  EventsPtr events;
  Line line;
  Color color;
  MultiSync watch, claim;

  CheckLineWinBehavior(EventsPtr ev, Line l, Color c, Priority priority)
      : events(std::move(ev)),
        line(std::move(l)),
        color(c),
        claim(make_sync({.request = {events->win(color)}, .request_priority = priority})) {
    std::vector<EventId> watched;
    for (const auto& p : line.cells) {
      watched.push_back(events->place(color, p));
      watched.push_back(events->place(opponent(color), p));
    }
    watch = MultiSync(make_sync({.wait_for = EventSet(watched)}));
  }

  State initial() const { return {}; }

  std::uint8_t full_mask() const { return static_cast<std::uint8_t>((1u << line.cells.size()) - 1); }

  Yield declare(const State& s) const {
    if (s.phase == 1) return std::nullopt;
    return s.seen == full_mask() ? claim : watch;
  }

  State advance(State s, EventId e) const {
    if (e == events->win(color)) return {0, 1};
    if (const auto p = events->placement(e)) {
      for (std::size_t k = 0; k < line.cells.size(); ++k) {
        if (line.cells[k] != p->pos) continue;
        if (p->color == color) {
          s.seen = static_cast<std::uint8_t>(s.seen | (1u << k));
        } else {
          return {0, 1};  // the line can no longer be completed
        }
      }
    }
    return s;
  }
};

inline ScenarioThread check_line_win_thread(EventsPtr events, Line line, Color color, Priority priority) {
  std::string name = std::string("check_win[") + symbol(color) + ":" + line.id() + "]";
  return ScenarioThread(std::move(name), CheckLineWinBehavior(std::move(events), std::move(line), color, priority));
}

// ---------------------------------------------------------------------------
// check_draw: requests Draw once every cell is filled.

struct DrawState {
  std::uint8_t placed = 0;
  std::uint8_t phase = 0;  // 0 counting, 1 finished
  friend bool operator==(DrawState, DrawState) = default;
};

struct CheckDrawBehavior {
  using State = DrawState;
  EventsPtr events;
  Priority priority;

  State initial() const { return {}; }

  Yield declare(const State& s) const {
    if (s.phase == 1) return std::nullopt;
    const EventSet wins{events->win(Color::Yellow), events->win(Color::Red)};
    if (s.placed < events->geometry().capacity()) {
      auto waits = events->all_placements();
      waits.merge(wins);
      return MultiSync(make_sync({.wait_for = std::move(waits)}));
    }
    return MultiSync(
        make_sync({.wait_for = wins, .request = {events->draw()}, .request_priority = priority}));
  }

  State advance(State s, EventId e) const {
    if (events->placement(e)) {
      ++s.placed;
    } else if (events->is_terminal(e)) {
      s.phase = 1;
    }
    return s;
  }
};

inline ScenarioThread check_draw_thread(EventsPtr events, Priority priority) {
  return ScenarioThread("check_draw", CheckDrawBehavior{std::move(events), priority});
}

// ---------------------------------------------------------------------------
// handle_win: after Win or Draw, hard-blocks every game event forever.

struct HandleWinBehavior {
  using State = std::uint8_t;  // 0 playing, 1 stopped
  EventsPtr events;
  MultiSync playing, stopped;

  explicit HandleWinBehavior(EventsPtr ev)
      : events(std::move(ev)),
        playing(make_sync({.wait_for = events->terminals()})),
        stopped(make_sync({.hard_block = events->all_events()})) {}

  State initial() const { return 0; }

  Yield declare(State s) const { return s == 0 ? playing : stopped; }

  State advance(State, EventId) const { return 1; }
};

inline ScenarioThread handle_win_thread(EventsPtr events) {
  return ScenarioThread("handle_win", HandleWinBehavior(std::move(events)));
}

// ---------------------------------------------------------------------------
// Players

/// Requests every placement of one color, every synchronization point.
/// Illegal ones are filtered out by the blocking rule threads.
struct RequestAllBehavior {
  using State = std::monostate;
  MultiSync sync;

  RequestAllBehavior(const EventsPtr& events, Color color, Priority priority)
      : sync(make_sync({.request = events->placements(color), .request_priority = priority})) {}

  State initial() const { return {}; }
  Yield declare(const State&) const { return sync; }
  State advance(const State& s, EventId) const { return s; }
};

inline ScenarioThread computer_player_thread(EventsPtr events, Priority base) {
  return ScenarioThread("computer_player", RequestAllBehavior(events, Color::Yellow, base));
}

/// Verification stand-in for the human: requests every red move so the
/// verifier branches on red's choice.
inline ScenarioThread adversarial_red_thread(EventsPtr events, Priority base) {
  return ScenarioThread("adversarial_red", RequestAllBehavior(events, Color::Red, base));
}

/// Source of red columns: a terminal, an HTTP mailbox or a scripted policy.
class InputProvider {
 public:
  virtual ~InputProvider() = default;
  /// Next column for red given the current board, or nullopt when input is
  /// exhausted (the red player then stops).
  virtual std::optional<int> next_column(const Board& board) = 0;
  /// Called when the last column was rejected; the provider is asked again.
  virtual void rejected(int /*column*/, std::string_view /*reason*/) {}
};

/// Replays a fixed list of columns.
class ScriptedProvider final : public InputProvider {
 public:
  explicit ScriptedProvider(std::vector<int> columns) : columns_(std::move(columns)) {}
  std::optional<int> next_column(const Board&) override {
    if (next_ >= columns_.size()) return std::nullopt;
    return columns_[next_++];
  }
  std::size_t consumed() const noexcept { return next_; }

 private:
  std::vector<int> columns_;
  std::size_t next_ = 0;
};

struct UserPlayerState {
  Board board;
  std::int8_t column = -1;  // chosen column awaiting placement
  std::uint8_t quit = 0;

  void encode(sbp::StateEncoder& enc) const {
    board.encode(enc);
    enc.put(static_cast<std::uint64_t>(static_cast<std::uint8_t>(column)));
    enc.put(quit);
  }
  friend bool operator==(const UserPlayerState&, const UserPlayerState&) = default;
};

/// Red driven by an InputProvider. On red's turn it emits RequestUserInput,
/// asks the provider for a column and requests every red placement in that
/// column; the rule threads leave the single legal one. Invalid or full
/// columns are re-prompted.
struct UserPlayerBehavior {
  using State = UserPlayerState;
  EventsPtr events;
  std::shared_ptr<InputProvider> provider;
  Priority priority;

  State initial() const { return {Board(events->geometry())}; }

  Yield declare(const State& s) const {
    if (s.quit) return std::nullopt;
    const auto& waits = events->all_placements();
    if (s.board.to_move() != Color::Red) return MultiSync(make_sync({.wait_for = waits}));
    if (s.column < 0) {
      return MultiSync(make_sync(
          {.wait_for = waits, .request = {events->request_user_input()}, .request_priority = priority}));
    }
    return MultiSync(make_sync(
        {.wait_for = waits, .request = events->column(Color::Red, s.column), .request_priority = priority}));
  }

  State advance(State s, EventId e) const {
    if (const auto p = events->placement(e)) {
      s.board.set(p->pos, cell_of(p->color));
      if (p->color == Color::Red) s.column = -1;
      return s;
    }
    if (e != events->request_user_input()) return s;
    while (true) {
      const auto col = provider->next_column(s.board);
      if (!col) {
        s.quit = 1;
        return s;
      }
      if (*col < 0 || *col >= s.board.cols()) {
        provider->rejected(*col, "column out of range");
        continue;
      }
      if (s.board.column_full(*col)) {
        provider->rejected(*col, "column is full");
        continue;
      }
      s.column = static_cast<std::int8_t>(*col);
      return s;
    }
  }
};

inline ScenarioThread user_player_thread(EventsPtr events, std::shared_ptr<InputProvider> provider,
                                         Priority base) {
  return ScenarioThread("user_player", UserPlayerBehavior{std::move(events), std::move(provider), base});
}

/// The rule layer: board manager, placement validity, turns, win and draw
/// detection, and game stop.
inline std::vector<ScenarioThread> rule_threads(const EventsPtr& events, const RulePriorities& p) {
  std::vector<ScenarioThread> out;
  out.push_back(board_manager_thread(events));
  out.push_back(valid_placement_thread(events));
  out.push_back(enforce_turns_thread(events));
  for (const auto& line : all_lines(events->geometry())) {
    out.push_back(check_line_win_thread(events, line, Color::Yellow, p.win_event));
    out.push_back(check_line_win_thread(events, line, Color::Red, p.win_event));
  }
  out.push_back(check_draw_thread(events, p.draw));
  out.push_back(handle_win_thread(events));
  return out;
}

}  // namespace connect4
