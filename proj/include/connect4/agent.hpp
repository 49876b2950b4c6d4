#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "connect4/board.hpp"
#include "connect4/events.hpp"
#include "connect4/rules.hpp"
#include "sbp/program.hpp"
#include "sbp/selection.hpp"
#include "sbp/verify.hpp"

namespace connect4 {

using sbp::Program;

/// Every tunable constant of the rule and strategy layers.
struct PriorityTable {
  Priority win = 20000;
  Priority block_threat = 19900;
  Priority block_below_threat = 19800;
  Priority potential_win_p1 = 15000;
  Priority potential_win_p2 = 12000;
  Priority block_potential = 11000;
  Priority fork_intersection = 18000;
  Priority fork_block = 17000;
  Priority fork_below_softblock = 16900;
  Priority center = 1000;
  Priority odd_row_bonus = 50;
  Priority even_row_bonus = 50;
  /// Added to fork_block per supported cell of a pending red fork.
  Priority fork_support_step = 100;
  Priority p_win_event = 30000;
  Priority p_draw = 100;
  Priority p_base = 0;
  /// Priority of forced opening moves in verification programs.
  Priority forced_prefix = 25000;

  RulePriorities rules() const { return {p_win_event, p_draw, p_base}; }

  /// Name/field pairs, in the spelling used by config files.
  template <class Self, class F>
  static void for_each(Self& self, F&& f) {
    f("WIN", self.win);
    f("BLOCK_THREAT", self.block_threat);
    f("BLOCK_BELOW_THREAT", self.block_below_threat);
    f("POTENTIAL_WIN_P1", self.potential_win_p1);
    f("POTENTIAL_WIN_P2", self.potential_win_p2);
    f("BLOCK_POTENTIAL", self.block_potential);
    f("FORK_INTERSECTION", self.fork_intersection);
    f("FORK_BLOCK", self.fork_block);
    f("FORK_BELOW_SOFTBLOCK", self.fork_below_softblock);
    f("CENTER", self.center);
    f("ODD_ROW_BONUS", self.odd_row_bonus);
    f("EVEN_ROW_BONUS", self.even_row_bonus);
    f("FORK_SUPPORT_STEP", self.fork_support_step);
    f("P_WIN_EVENT", self.p_win_event);
    f("P_DRAW", self.p_draw);
    f("P_BASE", self.p_base);
    f("FORCED_PREFIX", self.forced_prefix);
  }

  /// Highest priority any strategy statement can reach.
  Priority strategy_ceiling() const {
    return std::max({win, block_threat + even_row_bonus, block_below_threat,
                     fork_intersection, fork_block + 3 * fork_support_step + even_row_bonus,
                     potential_win_p1 + odd_row_bonus, potential_win_p2 + odd_row_bonus,
                     block_potential + even_row_bonus, center});
  }

  /// Throws std::invalid_argument naming the first violated ordering.
  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw std::invalid_argument(std::string("priority table: ") + what);
    };
    require(win > block_threat, "WIN must exceed BLOCK_THREAT");
    require(block_threat > block_below_threat, "BLOCK_THREAT must exceed BLOCK_BELOW_THREAT");
    require(fork_intersection > fork_block, "FORK_INTERSECTION must exceed FORK_BLOCK");
    require(odd_row_bonus >= 0 && even_row_bonus >= 0 && fork_support_step >= 0,
            "bonuses must be nonnegative");
    require(block_threat + even_row_bonus < win, "BLOCK_THREAT plus bonus must stay below WIN");
    require(fork_block + 3 * fork_support_step + even_row_bonus < fork_intersection,
            "graduated FORK_BLOCK must stay below FORK_INTERSECTION");
    require(fork_intersection < block_below_threat, "fork priorities must stay below BLOCK_BELOW_THREAT");
    require(potential_win_p1 + odd_row_bonus < fork_below_softblock,
            "POTENTIAL_WIN_P1 must stay below the fork soft block");
    for (Priority p : {win, block_threat, block_below_threat, potential_win_p1, potential_win_p2,
                       block_potential, fork_intersection, fork_block, fork_below_softblock, center}) {
      require(p > p_base, "every strategy constant must exceed P_BASE");
    }
    require(strategy_ceiling() < p_win_event, "every strategy constant must stay below P_WIN_EVENT");
    require(p_draw < p_win_event && p_draw > p_base, "P_DRAW must lie between P_BASE and P_WIN_EVENT");
    require(forced_prefix > strategy_ceiling(), "FORCED_PREFIX must exceed every strategy constant");
  }

  friend bool operator==(const PriorityTable&, const PriorityTable&) = default;
};

/// Strategy groups that can be switched off for ablation.
struct StrategyGroups {
  bool rules = true;
  bool win_threats = true;
  bool block_threats = true;
  bool red_forks = true;
  bool intersection_forks = true;
  bool yellow_forks = true;
  bool center = true;
  bool last_resort = true;

  template <class Self, class F>
  static void for_each(Self& self, F&& f) {
    f("rules", self.rules);
    f("win_threats", self.win_threats);
    f("block_threats", self.block_threats);
    f("red_forks", self.red_forks);
    f("intersection_forks", self.intersection_forks);
    f("yellow_forks", self.yellow_forks);
    f("center", self.center);
    f("last_resort", self.last_resort);
  }

  friend bool operator==(const StrategyGroups&, const StrategyGroups&) = default;
};

struct AgentConfig {
  Geometry geometry{};
  PriorityTable priorities{};
  StrategyGroups groups{};
  sbp::TieBreak tie_break = sbp::EventOrder{};
};

/// Paper-odd rows (1-based 1, 3, 5) are internal rows 0, 2, 4.
inline Priority parity_bonus(int row, Color color, const PriorityTable& t) {
  if (color == Color::Yellow) return row % 2 == 0 ? t.odd_row_bonus : 0;
  return row % 2 == 1 ? t.even_row_bonus : 0;
}

// ---------------------------------------------------------------------------
// Strategy logic: pure functions of the cells a strategy watches.

class CellReader {
 public:
  virtual ~CellReader() = default;
  virtual Cell at(Position p) const = 0;

  bool empty(Position p) const { return at(p) == Cell::Empty; }
  /// Immediately playable: bottom row or resting on a disc.
  bool supported(Position p) const { return p.row == 0 || at({p.row - 1, p.col}) != Cell::Empty; }
};

class BoardReader final : public CellReader {
 public:
  explicit BoardReader(const Board& board) : board_(board) {}
  Cell at(Position p) const override { return board_.at(p); }

 private:
  const Board& board_;
};

/// One desired sync statement, in board coordinates, for yellow.
struct Intent {
  std::vector<Position> request;
  Priority request_priority = 0;
  std::vector<Position> soft_block;
  Priority block_priority = 0;
};

class StrategyLogic {
 public:
  virtual ~StrategyLogic() = default;
  /// Cells the decision depends on, excluding the supports below them.
  virtual const std::vector<Position>& cells() const = 0;
  /// Appends intents for the current cells. False once the strategy can
  /// never fire again.
  virtual bool evaluate(const CellReader& r, const PriorityTable& t, std::vector<Intent>& out) const = 0;
};

struct ThreatStatus {
  int own = 0;
  int opponent = 0;
  std::vector<Position> empty;
  std::vector<bool> supported;  // parallel to `empty`
};

inline ThreatStatus threat_status(const Line& line, Color color, const CellReader& r) {
  ThreatStatus s;
  for (const auto& p : line.cells) {
    const Cell c = r.at(p);
    if (c == Cell::Empty) {
      s.empty.push_back(p);
      s.supported.push_back(r.supported(p));
    } else if (c == cell_of(color)) {
      ++s.own;
    } else {
      ++s.opponent;
    }
  }
  return s;
}

inline Position below(Position p) { return {p.row - 1, p.col}; }

/// Yellow's own line: WIN on the last supported cell; POTENTIAL_WIN_P2 on
/// supported cells of a two-empty line, weighted by the parity of the cell
/// that would remain.
class WinThreatLogic final : public StrategyLogic {
 public:
  explicit WinThreatLogic(Line line) : line_(std::move(line)) {}
  const std::vector<Position>& cells() const override { return line_.cells; }
  const Line& line() const noexcept { return line_; }

  bool evaluate(const CellReader& r, const PriorityTable& t, std::vector<Intent>& out) const override {
    const auto s = threat_status(line_, Color::Yellow, r);
    if (s.opponent > 0) return false;
    if (s.empty.size() == 1 && s.supported[0]) {
      out.push_back({{s.empty[0]}, t.win, {}, 0});
    } else if (s.empty.size() == 2) {
      for (std::size_t k = 0; k < 2; ++k) {
        if (!s.supported[k]) continue;
        const Position rest = s.empty[1 - k];
        out.push_back({{s.empty[k]}, t.potential_win_p2 + parity_bonus(rest.row, Color::Yellow, t), {}, 0});
      }
    }
    return true;
  }

 private:
  Line line_;
};

/// Red's line: BLOCK_THREAT on a supported completion, a soft block under an
/// unsupported one, BLOCK_POTENTIAL on a two-empty line.
class BlockThreatLogic final : public StrategyLogic {
 public:
  explicit BlockThreatLogic(Line line) : line_(std::move(line)) {}
  const std::vector<Position>& cells() const override { return line_.cells; }
  const Line& line() const noexcept { return line_; }

  bool evaluate(const CellReader& r, const PriorityTable& t, std::vector<Intent>& out) const override {
    const auto s = threat_status(line_, Color::Red, r);
    if (s.opponent > 0) return false;
    if (s.empty.size() == 1) {
      const Position e = s.empty[0];
      if (s.supported[0]) {
        out.push_back({{e}, t.block_threat + parity_bonus(e.row, Color::Red, t), {}, 0});
      } else {
        out.push_back({{}, 0, {below(e)}, t.block_below_threat});
      }
    } else if (s.empty.size() == 2) {
      for (std::size_t k = 0; k < 2; ++k) {
        if (!s.supported[k]) continue;
        const Position rest = s.empty[1 - k];
        out.push_back({{s.empty[k]}, t.block_potential + parity_bonus(rest.row, Color::Red, t), {}, 0});
      }
    }
    return true;
  }

 private:
  Line line_;
};

/// A run of win_length + 1 cells where red is one disc short of an open
/// line with both ends empty. Takes the missing middle cell when playable,
/// else an end; keeps yellow off the cells under the ends and the gap.
class RedForkLogic final : public StrategyLogic {
 public:
  explicit RedForkLogic(Line segment) : segment_(std::move(segment)) {}
  const std::vector<Position>& cells() const override { return segment_.cells; }
  const Line& segment() const noexcept { return segment_; }

  bool evaluate(const CellReader& r, const PriorityTable& t, std::vector<Intent>& out) const override {
    const auto& c = segment_.cells;
    const std::size_t n = c.size();
    int red = 0;
    std::optional<Position> gap;
    for (std::size_t k = 0; k < n; ++k) {
      const Cell cell = r.at(c[k]);
      if (cell == Cell::Yellow) return false;
      if (k == 0 || k == n - 1) continue;
      if (cell == Cell::Red) {
        ++red;
      } else {
        gap = c[k];
      }
    }
    const Position lo = c.front();
    const Position hi = c.back();
    if (!r.empty(lo) || !r.empty(hi)) return true;
    if (red != static_cast<int>(n) - 3 || !gap) return true;

    const std::array<Position, 3> keys{lo, *gap, hi};
    int filled = 0;
    for (const auto& p : keys) filled += r.supported(p);
    const Priority base = t.fork_block + t.fork_support_step * filled;

    std::vector<Position> under;
    for (const auto& p : keys) {
      if (!r.supported(p)) under.push_back(below(p));
    }
    if (r.supported(*gap)) {
      out.push_back({{*gap}, base + parity_bonus(gap->row, Color::Red, t), {}, 0});
    } else {
      for (const auto& end : {lo, hi}) {
        if (r.supported(end)) out.push_back({{end}, base + parity_bonus(end.row, Color::Red, t), {}, 0});
      }
    }
    if (!under.empty()) out.push_back({{}, 0, std::move(under), t.fork_below_softblock});
    return true;
  }

 private:
  Line segment_;
};

/// Two crossing lines, both two red discs short of completion outside the
/// shared cell. Disrupts at FORK_BLOCK and, while the shared cell is open,
/// claims it at FORK_INTERSECTION.
class IntersectionForkLogic final : public StrategyLogic {
 public:
  IntersectionForkLogic(Line a, Line b, Position x) : a_(std::move(a)), b_(std::move(b)), x_(x) {
    cells_ = a_.cells;
    for (const auto& p : b_.cells) {
      if (p != x_) cells_.push_back(p);
    }
  }
  const std::vector<Position>& cells() const override { return cells_; }
  const Line& first() const noexcept { return a_; }
  const Line& second() const noexcept { return b_; }
  Position intersection() const noexcept { return x_; }

  bool evaluate(const CellReader& r, const PriorityTable& t, std::vector<Intent>& out) const override {
    for (const auto& p : cells_) {
      if (r.at(p) == Cell::Yellow) return false;
    }
    const int need = static_cast<int>(a_.cells.size()) - 2;
    if (red_outside(a_, r) < need || red_outside(b_, r) < need) return true;

    Intent disrupt{{}, t.fork_block, {}, t.fork_block};
    for (const auto& p : cells_) {
      if (p == x_ || !r.empty(p)) continue;
      if (r.supported(p)) {
        disrupt.request.push_back(p);
      } else {
        disrupt.soft_block.push_back(below(p));
      }
    }
    if (!disrupt.request.empty() || !disrupt.soft_block.empty()) out.push_back(std::move(disrupt));
    if (r.empty(x_)) {
      Intent claim{{x_}, t.fork_intersection, {}, t.fork_intersection};
      if (!r.supported(x_)) claim.soft_block.push_back(below(x_));
      out.push_back(std::move(claim));
    }
    return true;
  }

 private:
  int red_outside(const Line& line, const CellReader& r) const {
    int n = 0;
    for (const auto& p : line.cells) n += p != x_ && r.at(p) == Cell::Red;
    return n;
  }

  Line a_, b_;
  Position x_;
  std::vector<Position> cells_;
};

/// Two crossing yellow lines each two discs short outside the shared cell:
/// taking the playable shared cell makes two threats at once.
class YellowForkLogic final : public StrategyLogic {
 public:
  YellowForkLogic(Line a, Line b, Position x) : a_(std::move(a)), b_(std::move(b)), x_(x) {
    cells_ = a_.cells;
    for (const auto& p : b_.cells) {
      if (p != x_) cells_.push_back(p);
    }
  }
  const std::vector<Position>& cells() const override { return cells_; }
  Position intersection() const noexcept { return x_; }

  bool evaluate(const CellReader& r, const PriorityTable& t, std::vector<Intent>& out) const override {
    for (const auto& p : cells_) {
      if (r.at(p) == Cell::Red) return false;
    }
    const int need = static_cast<int>(a_.cells.size()) - 2;
    if (r.empty(x_) && r.supported(x_) && yellow_outside(a_, r) == need && yellow_outside(b_, r) == need) {
      out.push_back({{x_}, t.potential_win_p1 + parity_bonus(x_.row, Color::Yellow, t), {}, 0});
    }
    return true;
  }

 private:
  int yellow_outside(const Line& line, const CellReader& r) const {
    int n = 0;
    for (const auto& p : line.cells) n += p != x_ && r.at(p) == Cell::Yellow;
    return n;
  }

  Line a_, b_;
  Position x_;
  std::vector<Position> cells_;
};

// ---------------------------------------------------------------------------
// Strategy threads

inline constexpr std::size_t kMaxWatched = 16;

/// Cells as last seen. A strategy that can no longer fire keeps only the
/// dead flag.
struct WatchedCells {
  std::array<Cell, kMaxWatched> cells{};
  bool dead = false;

  void encode(sbp::StateEncoder& enc) const {
    enc.put_raw(cells.data(), cells.size());
    enc.put(static_cast<std::uint8_t>(dead));
  }
  friend bool operator==(const WatchedCells&, const WatchedCells&) = default;
};

class WatchedReader final : public CellReader {
 public:
  WatchedReader(const std::vector<Position>& positions, const WatchedCells& state)
      : positions_(positions), state_(state) {}
  Cell at(Position p) const override {
    for (std::size_t k = 0; k < positions_.size(); ++k) {
      if (positions_[k] == p) return state_.cells[k];
    }
    throw std::logic_error("strategy read an unwatched cell");
  }

 private:
  const std::vector<Position>& positions_;
  const WatchedCells& state_;
};

inline MultiSync intents_to_sync(const std::vector<Intent>& intents, const GameEvents& ev, EventSet waits) {
  std::vector<sbp::SyncDeclaration> statements;
  statements.reserve(intents.size() + 1);
  statements.push_back(make_sync({.wait_for = std::move(waits)}));
  for (const auto& in : intents) {
    std::vector<EventId> req, soft;
    for (const auto& p : in.request) req.push_back(ev.place(Color::Yellow, p));
    for (const auto& p : in.soft_block) soft.push_back(ev.place(Color::Yellow, p));
    statements.push_back(make_sync({.request = EventSet(req),
                                    .soft_block = EventSet(soft),
                                    .request_priority = in.request_priority,
                                    .block_priority = in.block_priority}));
  }
  return MultiSync(std::move(statements));
}

/// Runs a StrategyLogic over the cells it watches plus the cells directly
/// below them, tracked by waiting on their placements.
struct StrategyBehavior {
  using State = WatchedCells;
  EventsPtr events;
  std::shared_ptr<const StrategyLogic> logic;
  PriorityTable table;
  std::vector<Position> watched;
  EventSet waits;
  MultiSync idle;

  StrategyBehavior(EventsPtr ev, std::shared_ptr<const StrategyLogic> lg, PriorityTable t)
      : events(std::move(ev)), logic(std::move(lg)), table(t) {
    for (const auto& p : logic->cells()) add(p);
    for (const auto& p : logic->cells()) {
      if (p.row > 0) add(below(p));
    }
    if (watched.size() > kMaxWatched) throw std::logic_error("strategy watches too many cells");
    std::vector<EventId> ids;
    for (const auto& p : watched) {
      ids.push_back(events->place(Color::Yellow, p));
      ids.push_back(events->place(Color::Red, p));
    }
    waits = EventSet(ids);
    idle = MultiSync(make_sync({.wait_for = waits}));
  }

  State initial() const { return {}; }

  Yield declare(const State& s) const {
    if (s.dead) return std::nullopt;
    thread_local std::vector<Intent> intents;
    intents.clear();
    if (!logic->evaluate(WatchedReader(watched, s), table, intents)) return std::nullopt;
    if (intents.empty()) return idle;
    return intents_to_sync(intents, *events, waits);
  }

  State advance(State s, EventId e) const {
    if (const auto p = events->placement(e)) {
      for (std::size_t k = 0; k < watched.size(); ++k) {
        if (watched[k] == p->pos) s.cells[k] = cell_of(p->color);
      }
      thread_local std::vector<Intent> scratch;
      scratch.clear();
      if (!logic->evaluate(WatchedReader(watched, s), table, scratch)) return State{{}, true};
    }
    return s;
  }

 private:
  void add(Position p) {
    if (std::find(watched.begin(), watched.end(), p) == watched.end()) watched.push_back(p);
  }
};

struct CenterBehavior {
  using State = std::monostate;
  MultiSync sync;

  CenterBehavior(const EventsPtr& events, Priority priority)
      : sync(make_sync({.request = events->column(Color::Yellow, events->geometry().center_col()),
                        .request_priority = priority})) {}

  State initial() const { return {}; }
  Yield declare(const State&) const { return sync; }
  State advance(const State& s, EventId) const { return s; }
};

inline ScenarioThread center_column_thread(EventsPtr events, Priority priority) {
  return ScenarioThread("center", CenterBehavior(events, priority));
}

/// Keeps yellow from stalling when every legal cell is soft-blocked: it
/// re-evaluates the loaded strategies on its own copy of the board and, in
/// that case only, requests the least-blocked cells just above their block,
/// keeping those its strategies want most.
struct LastResortBehavior {
  using State = Board;
  EventsPtr events;
  std::shared_ptr<const std::vector<std::shared_ptr<const StrategyLogic>>> strategies;
  /// Strategy indices touching each cell slot (row * cols + col).
  std::shared_ptr<const std::vector<std::vector<std::uint32_t>>> by_cell;
  PriorityTable table;
  bool center = false;
  MultiSync idle_sync;

  State initial() const { return Board(events->geometry()); }

  Yield declare(const Board& b) const {
    const EventSet& waits = events->all_placements();
    const auto idle = [&] { return idle_sync; };
    if (b.to_move() != Color::Yellow) return idle();

    const BoardReader reader(b);
    struct Candidate {
      Position cell;
      Priority block;
      Priority request;
    };
    std::vector<Candidate> blocked;
    for (int c = 0; c < b.cols(); ++c) {
      const auto row = b.lowest_empty_row(c);
      if (!row) continue;
      const Position p{*row, c};
      const auto block = soft_block_on(p, reader);
      if (!block) return idle();
      blocked.push_back({p, *block, request_on(p, reader)});
    }
    if (blocked.empty()) return idle();
    for (const auto& cand : blocked) {
      if (cand.request > cand.block) return idle();
    }
    Priority least = blocked.front().block;
    for (const auto& cand : blocked) least = std::min(least, cand.block);
    Priority strongest = std::numeric_limits<Priority>::min();
    for (const auto& cand : blocked) {
      if (cand.block == least) strongest = std::max(strongest, cand.request);
    }
    std::vector<EventId> pick;
    for (const auto& cand : blocked) {
      if (cand.block == least && cand.request == strongest) pick.push_back(events->place(Color::Yellow, cand.cell));
    }
    return MultiSync(
        make_sync({.wait_for = waits, .request = EventSet(pick), .request_priority = least + 1}));
  }

  Board advance(Board b, EventId e) const {
    if (const auto p = events->placement(e)) b.set(p->pos, cell_of(p->color));
    return b;
  }

 private:
  const std::vector<std::uint32_t>& touching(Position p) const {
    return (*by_cell)[static_cast<std::size_t>(p.row * events->geometry().cols + p.col)];
  }

  /// Soft blocks on `p` come only from strategies watching the cell above.
  std::optional<Priority> soft_block_on(Position p, const CellReader& r) const {
    std::optional<Priority> out;
    if (p.row + 1 >= events->geometry().rows) return out;
    thread_local std::vector<Intent> intents;
    for (auto i : touching({p.row + 1, p.col})) {
      intents.clear();
      (*strategies)[i]->evaluate(r, table, intents);
      for (const auto& in : intents) {
        if (std::ranges::find(in.soft_block, p) != in.soft_block.end()) {
          out = std::max(out.value_or(std::numeric_limits<Priority>::min()), in.block_priority);
        }
      }
    }
    return out;
  }

  Priority request_on(Position p, const CellReader& r) const {
    Priority out = table.p_base;
    if (center && p.col == events->geometry().center_col()) out = std::max(out, table.center);
    thread_local std::vector<Intent> intents;
    for (auto i : touching(p)) {
      intents.clear();
      (*strategies)[i]->evaluate(r, table, intents);
      for (const auto& in : intents) {
        if (std::ranges::find(in.request, p) != in.request.end()) out = std::max(out, in.request_priority);
      }
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Strategy enumeration

inline std::string pair_id(const Line& a, const Line& b) { return a.id() + "&" + b.id(); }

enum class DirectionClass { Horizontal, Vertical, Diagonal };

inline DirectionClass direction_class(Direction d) {
  if (d == Direction::Horizontal) return DirectionClass::Horizontal;
  if (d == Direction::Vertical) return DirectionClass::Vertical;
  return DirectionClass::Diagonal;
}

/// Line pairs sharing exactly one cell, first line of class `ca`, second of
/// class `cb`. For equal classes, pairs of differing direction, each once.
inline std::vector<std::tuple<Line, Line, Position>> crossing_pairs(const Geometry& g, DirectionClass ca,
                                                                    DirectionClass cb) {
  const auto lines = all_lines(g);
  std::vector<std::tuple<Line, Line, Position>> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (direction_class(lines[i].direction) != ca) continue;
    for (std::size_t j = 0; j < lines.size(); ++j) {
      if (direction_class(lines[j].direction) != cb) continue;
      if (lines[i].direction == lines[j].direction) continue;
      if (ca == cb && j <= i) continue;
      const auto shared = shared_cells(lines[i], lines[j]);
      if (shared.size() == 1) out.emplace_back(lines[i], lines[j], shared[0]);
    }
  }
  return out;
}

struct NamedStrategy {
  std::string name;
  std::shared_ptr<const StrategyLogic> logic;
};

/// The strategy instances enabled by `groups`, in program order.
inline std::vector<NamedStrategy> strategies(const Geometry& g, const StrategyGroups& groups) {
  std::vector<NamedStrategy> out;
  const auto lines = all_lines(g);
  if (groups.win_threats) {
    for (const auto& l : lines) out.push_back({"win_threat[" + l.id() + "]", std::make_shared<WinThreatLogic>(l)});
  }
  if (groups.block_threats) {
    for (const auto& l : lines) {
      out.push_back({"block_threat[" + l.id() + "]", std::make_shared<BlockThreatLogic>(l)});
    }
  }
  if (groups.red_forks) {
    for (const auto& s : all_segments(g, g.win_length + 1,
                                      {Direction::Horizontal, Direction::DiagUp, Direction::DiagDown})) {
      out.push_back({"red_fork[" + s.id() + "]", std::make_shared<RedForkLogic>(s)});
    }
  }
  if (groups.intersection_forks) {
    using C = DirectionClass;
    for (auto [ca, cb] : {std::pair{C::Vertical, C::Diagonal}, std::pair{C::Horizontal, C::Diagonal},
                          std::pair{C::Horizontal, C::Vertical}}) {
      for (auto& [a, b, x] : crossing_pairs(g, ca, cb)) {
        out.push_back({"red_intersection[" + pair_id(a, b) + "]",
                       std::make_shared<IntersectionForkLogic>(a, b, x)});
      }
    }
  }
  if (groups.yellow_forks) {
    using C = DirectionClass;
    for (auto [ca, cb] : {std::pair{C::Horizontal, C::Vertical}, std::pair{C::Horizontal, C::Diagonal},
                          std::pair{C::Vertical, C::Diagonal}, std::pair{C::Diagonal, C::Diagonal}}) {
      for (auto& [a, b, x] : crossing_pairs(g, ca, cb)) {
        out.push_back({"yellow_fork[" + pair_id(a, b) + "]", std::make_shared<YellowForkLogic>(a, b, x)});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Program assembly

/// Red is either fed by an input provider or, for verification, requests
/// every legal move so the verifier branches on it.
struct InteractiveRed {
  std::shared_ptr<InputProvider> provider;
};
struct AdversarialRed {};
using RedPlayer = std::variant<InteractiveRed, AdversarialRed>;

inline std::vector<ScenarioThread> agent_threads(const AgentConfig& config, const EventsPtr& events) {
  const auto& t = config.priorities;
  std::vector<ScenarioThread> out;
  const auto list = strategies(config.geometry, config.groups);
  for (const auto& s : list) out.emplace_back(s.name, StrategyBehavior(events, s.logic, t));
  if (config.groups.center) out.push_back(center_column_thread(events, t.center));
  if (config.groups.last_resort) {
    auto logic = std::make_shared<std::vector<std::shared_ptr<const StrategyLogic>>>();
    auto index = std::make_shared<std::vector<std::vector<std::uint32_t>>>(
        static_cast<std::size_t>(config.geometry.capacity()));
    for (const auto& s : list) {
      const auto i = static_cast<std::uint32_t>(logic->size());
      logic->push_back(s.logic);
      for (const auto& p : s.logic->cells()) {
        (*index)[static_cast<std::size_t>(p.row * config.geometry.cols + p.col)].push_back(i);
      }
    }
    out.emplace_back("last_resort",
                     LastResortBehavior{events, std::move(logic), std::move(index), t, config.groups.center,
                                        MultiSync(make_sync({.wait_for = events->all_placements()}))});
  }
  return out;
}

/// Rule threads, strategies, yellow's base player and the red player, plus
/// an optional forced opening.
inline Program build_agent_program(const AgentConfig& config, const RedPlayer& red,
                                   const std::vector<Event>& forced_prefix = {}) {
  if (!config.groups.rules) throw std::invalid_argument("the rule threads cannot be disabled");
  config.priorities.validate();
  auto registry = std::make_shared<sbp::EventRegistry>();
  const auto events = GameEvents::create(config.geometry, *registry);
  const auto& t = config.priorities;

  auto threads = rule_threads(events, t.rules());
  if (!forced_prefix.empty()) {
    std::vector<EventId> ids;
    for (const auto& e : forced_prefix) {
      const auto p = decode_placement(e);
      if (!p || !config.geometry.contains(p->pos)) {
        throw std::invalid_argument("forced prefix holds a non-placement event: " + e.to_string());
      }
      ids.push_back(events->place(p->color, p->pos));
    }
    threads.push_back(sbp::forced_prefix_thread(std::move(ids), events->all_placements(), t.forced_prefix));
  }
  auto agent = agent_threads(config, events);
  threads.insert(threads.end(), agent.begin(), agent.end());
  threads.push_back(computer_player_thread(events, t.p_base));
  if (const auto* in = std::get_if<InteractiveRed>(&red)) {
    threads.push_back(user_player_thread(events, in->provider, t.p_base));
  } else {
    threads.push_back(adversarial_red_thread(events, t.p_base));
  }
  return Program(std::move(registry), std::move(threads), config.tie_break);
}

}  // namespace connect4
