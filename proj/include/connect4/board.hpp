#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbp/thread.hpp"

namespace connect4 {

enum class Cell : std::uint8_t { Empty = 0, Yellow = 1, Red = 2 };
enum class Color : std::uint8_t { Yellow = 1, Red = 2 };

constexpr Cell cell_of(Color c) noexcept { return static_cast<Cell>(c); }
constexpr Color opponent(Color c) noexcept { return c == Color::Yellow ? Color::Red : Color::Yellow; }
constexpr char symbol(Color c) noexcept { return c == Color::Yellow ? 'Y' : 'R'; }
constexpr char symbol(Cell c) noexcept {
  return c == Cell::Empty ? '.' : (c == Cell::Yellow ? 'Y' : 'R');
}
inline std::string color_name(Color c) { return c == Color::Yellow ? "Yellow" : "Red"; }

/// Row 0 is the bottom row.
struct Position {
  int row = 0;
  int col = 0;
  friend bool operator==(Position, Position) = default;
  friend auto operator<=>(Position, Position) = default;
};

inline constexpr int kMaxRows = 8;
inline constexpr int kMaxCols = 8;

/// Board dimensions and the run length needed to win.
struct Geometry {
  int rows = 6;
  int cols = 7;
  int win_length = 4;

  void validate() const {
    if (rows < 1 || rows > kMaxRows || cols < 1 || cols > kMaxCols) {
      throw std::invalid_argument("board dimensions must be within 1..8");
    }
    if (win_length < 2 || (win_length > rows && win_length > cols)) {
      throw std::invalid_argument("win length does not fit on the board");
    }
  }

  int capacity() const noexcept { return rows * cols; }
  int center_col() const noexcept { return cols / 2; }
  bool contains(Position p) const noexcept {
    return p.row >= 0 && p.row < rows && p.col >= 0 && p.col < cols;
  }

  friend bool operator==(const Geometry&, const Geometry&) = default;
};

/// Grid of cells obeying gravity. Stores its geometry; cells outside it
/// are always empty.
class Board {
 public:
  explicit Board(Geometry geometry = {}) : geometry_(geometry) { geometry_.validate(); }

  const Geometry& geometry() const noexcept { return geometry_; }
  int rows() const noexcept { return geometry_.rows; }
  int cols() const noexcept { return geometry_.cols; }

  Cell at(Position p) const {
    check(p);
    return cells_[slot(p)];
  }
  Cell at(int row, int col) const { return at({row, col}); }

  /// Raw mutation; does not enforce gravity.
  void set(Position p, Cell c) {
    check(p);
    cells_[slot(p)] = c;
  }

  /// Least row with an empty cell in `col`, or nullopt when full.
  std::optional<int> lowest_empty_row(int col) const {
    if (col < 0 || col >= geometry_.cols) throw std::out_of_range("column out of range");
    for (int r = 0; r < geometry_.rows; ++r) {
      if (cells_[slot({r, col})] == Cell::Empty) return r;
    }
    return std::nullopt;
  }

  bool column_full(int col) const { return !lowest_empty_row(col).has_value(); }

  /// Drops a disc into `col` and returns where it landed.
  Position drop(Color color, int col) {
    const auto row = lowest_empty_row(col);
    if (!row) throw std::invalid_argument("column " + std::to_string(col) + " is full");
    const Position p{*row, col};
    set(p, cell_of(color));
    return p;
  }

  int count(Cell c) const noexcept {
    int n = 0;
    for (int r = 0; r < geometry_.rows; ++r) {
      for (int col = 0; col < geometry_.cols; ++col) n += cells_[slot({r, col})] == c;
    }
    return n;
  }

  int discs() const noexcept { return count(Cell::Yellow) + count(Cell::Red); }
  bool full() const noexcept { return discs() == geometry_.capacity(); }

  /// Yellow moves first, so yellow is to move whenever the counts match.
  Color to_move() const noexcept {
    return count(Cell::Yellow) == count(Cell::Red) ? Color::Yellow : Color::Red;
  }

  std::vector<int> open_columns() const {
    std::vector<int> out;
    for (int c = 0; c < geometry_.cols; ++c) {
      if (!column_full(c)) out.push_back(c);
    }
    return out;
  }

  /// Gravity and disc-count balance.
  bool well_formed() const {
    for (int c = 0; c < geometry_.cols; ++c) {
      bool seen_empty = false;
      for (int r = 0; r < geometry_.rows; ++r) {
        const bool empty = at(r, c) == Cell::Empty;
        if (!empty && seen_empty) return false;
        seen_empty = seen_empty || empty;
      }
    }
    const int diff = count(Cell::Yellow) - count(Cell::Red);
    return diff == 0 || diff == 1;
  }

  /// Top row first, '.', 'Y', 'R'.
  std::vector<std::string> row_strings() const {
    std::vector<std::string> out;
    for (int r = geometry_.rows - 1; r >= 0; --r) {
      std::string line;
      for (int c = 0; c < geometry_.cols; ++c) line += symbol(at(r, c));
      out.push_back(std::move(line));
    }
    return out;
  }

  /// Row strings plus a column index footer.
  std::string ascii() const {
    std::string out;
    for (const auto& line : row_strings()) out += line + '\n';
    for (int c = 0; c < geometry_.cols; ++c) out += static_cast<char>('0' + c);
    out += '\n';
    return out;
  }

  void encode(sbp::StateEncoder& enc) const {
    enc.put_raw(cells_.data(), static_cast<std::size_t>(kMaxRows * kMaxCols));
  }

  friend bool operator==(const Board&, const Board&) = default;

 private:
  static constexpr std::size_t slot(Position p) noexcept {
    return static_cast<std::size_t>(p.row * kMaxCols + p.col);
  }
  void check(Position p) const {
    if (!geometry_.contains(p)) throw std::out_of_range("position off the board");
  }

  Geometry geometry_;
  std::array<Cell, kMaxRows * kMaxCols> cells_{};
};

enum class Direction : std::uint8_t { Horizontal, Vertical, DiagUp, DiagDown };

constexpr Position step(Direction d) noexcept {
  switch (d) {
    case Direction::Horizontal: return {0, 1};
    case Direction::Vertical: return {1, 0};
    case Direction::DiagUp: return {1, 1};
    case Direction::DiagDown: return {-1, 1};
  }
  return {0, 0};
}

constexpr const char* short_name(Direction d) noexcept {
  switch (d) {
    case Direction::Horizontal: return "h";
    case Direction::Vertical: return "v";
    case Direction::DiagUp: return "du";
    case Direction::DiagDown: return "dd";
  }
  return "?";
}

constexpr bool is_diagonal(Direction d) noexcept {
  return d == Direction::DiagUp || d == Direction::DiagDown;
}

/// Contiguous collinear cells.
struct Line {
  Direction direction = Direction::Horizontal;
  std::vector<Position> cells;

  bool contains(Position p) const {
    for (const auto& c : cells) {
      if (c == p) return true;
    }
    return false;
  }

  /// e.g. "h(0,0)" for the line starting at row 0, col 0.
  std::string id() const {
    return std::string(short_name(direction)) + "(" + std::to_string(cells.front().row) + "," +
           std::to_string(cells.front().col) + ")";
  }

  friend bool operator==(const Line&, const Line&) = default;
};

/// Every on-board run of `length` cells in the given directions, ordered by
/// direction, then start row, then start column.
inline std::vector<Line> all_segments(const Geometry& g, int length,
                                      std::initializer_list<Direction> directions) {
  std::vector<Line> out;
  for (Direction d : directions) {
    const Position s = step(d);
    for (int r = 0; r < g.rows; ++r) {
      for (int c = 0; c < g.cols; ++c) {
        Line line{d, {}};
        bool fits = true;
        for (int k = 0; k < length && fits; ++k) {
          const Position p{r + k * s.row, c + k * s.col};
          fits = g.contains(p);
          line.cells.push_back(p);
        }
        if (fits) out.push_back(std::move(line));
      }
    }
  }
  return out;
}

/// All winning lines of the geometry.
inline std::vector<Line> all_lines(const Geometry& g = {}) {
  return all_segments(g, g.win_length,
                      {Direction::Horizontal, Direction::Vertical, Direction::DiagUp, Direction::DiagDown});
}

/// all_lines(g), computed once per geometry and thread.
inline const std::vector<Line>& lines_of(const Geometry& g) {
  thread_local std::deque<std::pair<Geometry, std::vector<Line>>> cache;
  for (const auto& [geo, lines] : cache) {
    if (geo == g) return lines;
  }
  cache.emplace_back(g, all_lines(g));
  return cache.back().second;
}

/// Shared cells of two lines.
inline std::vector<Position> shared_cells(const Line& a, const Line& b) {
  std::vector<Position> out;
  for (const auto& p : a.cells) {
    if (b.contains(p)) out.push_back(p);
  }
  return out;
}

class InconsistentBoard : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Scans every winning line. Throws if both colors complete a line, which
/// legal play cannot produce.
inline std::optional<Color> board_winner(const Board& board) {
  bool yellow = false;
  bool red = false;
  for (const auto& line : lines_of(board.geometry())) {
    const Cell first = board.at(line.cells.front());
    if (first == Cell::Empty) continue;
    bool complete = true;
    for (const auto& p : line.cells) complete = complete && board.at(p) == first;
    if (!complete) continue;
    (first == Cell::Yellow ? yellow : red) = true;
  }
  if (yellow && red) throw InconsistentBoard("both colors own a complete line");
  if (yellow) return Color::Yellow;
  if (red) return Color::Red;
  return std::nullopt;
}

enum class GameStatus { Playing, YellowWon, RedWon, Draw };

inline const char* to_string(GameStatus s) {
  switch (s) {
    case GameStatus::Playing: return "playing";
    case GameStatus::YellowWon: return "yellow_won";
    case GameStatus::RedWon: return "red_won";
    case GameStatus::Draw: return "draw";
  }
  return "?";
}

/// Status implied by the board alone.
inline GameStatus board_status(const Board& board) {
  if (auto w = board_winner(board)) return *w == Color::Yellow ? GameStatus::YellowWon : GameStatus::RedWon;
  return board.full() ? GameStatus::Draw : GameStatus::Playing;
}

}  // namespace connect4
