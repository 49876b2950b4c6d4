#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "connect4/board.hpp"
#include "connect4/rules.hpp"

namespace connect4 {

/// A red-player strategy: maps a non-terminal board to a non-full column.
struct Policy {
  std::string name;
  std::function<int(const Board&)> choose;
  bool deterministic = true;
  std::optional<std::uint64_t> seed;
};

inline Policy random_policy(std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return {"random",
          [rng](const Board& b) {
            const auto open = b.open_columns();
            if (open.empty()) throw std::invalid_argument("no open column");
            std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
            return open[pick(*rng)];
          },
          false, seed};
}

namespace minimax {

inline constexpr std::int64_t kWin = 1'000'000;

/// Columns ordered by distance from the center, left first on ties.
inline std::vector<int> center_order(int cols) {
  std::vector<int> order(static_cast<std::size_t>(cols));
  for (int c = 0; c < cols; ++c) order[static_cast<std::size_t>(c)] = c;
  const int mid2 = cols - 1;  // twice the center coordinate
  std::ranges::stable_sort(order, [&](int a, int b) { return std::abs(2 * a - mid2) < std::abs(2 * b - mid2); });
  return order;
}

inline std::int64_t score_window(int own, int opp, int empty) {
  std::int64_t s = 0;
  if (own == 3 && empty == 1) s += 5;
  if (own == 2 && empty == 2) s += 2;
  if (opp == 3 && empty == 1) s -= 5;
  if (opp == 2 && empty == 2) s -= 2;
  return s;
}

/// Window-scoring heuristic from `me`'s point of view: three discs per own
/// disc in the center column plus per-line window scores.
inline std::int64_t heuristic(const Board& b, Color me) {
  const Cell own = cell_of(me);
  const Cell opp = cell_of(opponent(me));
  std::int64_t s = 0;
  const int cc = b.geometry().center_col();
  for (int r = 0; r < b.rows(); ++r) s += 3 * (b.at(r, cc) == own);
  for (const auto& line : lines_of(b.geometry())) {
    int o = 0, p = 0, e = 0;
    for (const auto& q : line.cells) {
      const Cell c = b.at(q);
      o += c == own;
      p += c == opp;
      e += c == Cell::Empty;
    }
    s += score_window(o, p, e);
  }
  return s;
}

/// Terminal value from `me`'s view, preferring quicker wins.
inline std::optional<std::int64_t> terminal_value(const Board& b, Color me, int depth_left) {
  if (auto w = board_winner(b)) return *w == me ? kWin + depth_left : -(kWin + depth_left);
  if (b.full()) return 0;
  return std::nullopt;
}

/// Alpha-beta minimax; `me` maximizes.
inline std::int64_t search(Board& b, int depth, std::int64_t alpha, std::int64_t beta, Color to_move, Color me,
                           const std::vector<int>& order) {
  if (auto t = terminal_value(b, me, depth)) return *t;
  if (depth == 0) return heuristic(b, me);
  const bool maximizing = to_move == me;
  std::int64_t best = maximizing ? std::numeric_limits<std::int64_t>::min() : std::numeric_limits<std::int64_t>::max();
  for (int c : order) {
    if (b.column_full(c)) continue;
    const Position p = b.drop(to_move, c);
    const std::int64_t v = search(b, depth - 1, alpha, beta, opponent(to_move), me, order);
    b.set(p, Cell::Empty);
    if (maximizing) {
      best = std::max(best, v);
      alpha = std::max(alpha, v);
    } else {
      best = std::min(best, v);
      beta = std::min(beta, v);
    }
    if (alpha >= beta) break;
  }
  return best;
}

/// Exact minimax value of each legal move for the side to move, depth
/// counted in plies including the move itself.
inline std::vector<std::pair<int, std::int64_t>> root_values(const Board& board, int depth) {
  Board b = board;
  const Color me = b.to_move();
  const auto order = center_order(b.cols());
  std::vector<std::pair<int, std::int64_t>> out;
  for (int c : order) {
    if (b.column_full(c)) continue;
    const Position p = b.drop(me, c);
    const auto v = search(b, depth - 1, std::numeric_limits<std::int64_t>::min(),
                          std::numeric_limits<std::int64_t>::max(), opponent(me), me, order);
    b.set(p, Cell::Empty);
    out.emplace_back(c, v);
  }
  return out;
}

/// Best move: highest value, then nearest the center, then a seeded pick
/// between the two columns equally near (left when unseeded).
inline int choose(const Board& board, int depth, std::optional<std::uint64_t> seed, std::mt19937_64* rng) {
  const auto values = root_values(board, depth);
  if (values.empty()) throw std::invalid_argument("no open column");
  std::int64_t best = values.front().second;
  for (const auto& [c, v] : values) best = std::max(best, v);
  const int mid2 = board.cols() - 1;
  int nearest = std::numeric_limits<int>::max();
  for (const auto& [c, v] : values) {
    if (v == best) nearest = std::min(nearest, std::abs(2 * c - mid2));
  }
  std::vector<int> tied;
  for (const auto& [c, v] : values) {
    if (v == best && std::abs(2 * c - mid2) == nearest) tied.push_back(c);
  }
  std::ranges::sort(tied);
  if (tied.size() == 1 || !seed || rng == nullptr) return tied.front();
  std::uniform_int_distribution<std::size_t> pick(0, tied.size() - 1);
  return tied[pick(*rng)];
}

}  // namespace minimax

inline Policy minimax_policy(int depth, std::optional<std::uint64_t> seed = std::nullopt) {
  if (depth < 1) throw std::invalid_argument("minimax depth must be at least 1");
  std::shared_ptr<std::mt19937_64> rng;
  if (seed) rng = std::make_shared<std::mt19937_64>(*seed);
  return {"minimax" + std::to_string(depth),
          [depth, seed, rng](const Board& b) { return minimax::choose(b, depth, seed, rng.get()); }, true, seed};
}

/// Feeds a policy's choices to the red player thread.
class PolicyProvider final : public InputProvider {
 public:
  explicit PolicyProvider(Policy policy) : policy_(std::move(policy)) {}
  std::optional<int> next_column(const Board& board) override { return policy_.choose(board); }
  const Policy& policy() const noexcept { return policy_; }

 private:
  Policy policy_;
};

}  // namespace connect4
