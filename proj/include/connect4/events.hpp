#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "connect4/board.hpp"
#include "sbp/event.hpp"
#include "sbp/sync.hpp"

namespace connect4 {

using sbp::Event;
using sbp::EventId;
using sbp::EventSet;

inline Event place_event(Color color, Position p) {
  return Event(color == Color::Yellow ? "PlaceYellow" : "PlaceRed",
               {{"row", std::int64_t{p.row}}, {"col", std::int64_t{p.col}}});
}
inline Event win_event(Color color) { return Event("Win", {{"color", std::string(1, symbol(color))}}); }
inline Event draw_event() { return Event("Draw"); }
inline Event request_user_input_event() { return Event("RequestUserInput"); }

struct Placement {
  Color color;
  Position pos;
  friend bool operator==(Placement, Placement) = default;
};

/// Decodes a placement event by value, independent of any registry.
inline std::optional<Placement> decode_placement(const Event& e) {
  Color color;
  if (e.name() == "PlaceYellow") {
    color = Color::Yellow;
  } else if (e.name() == "PlaceRed") {
    color = Color::Red;
  } else {
    return std::nullopt;
  }
  const auto row = e.int_field("row");
  const auto col = e.int_field("col");
  if (!row || !col) return std::nullopt;
  return Placement{color, {static_cast<int>(*row), static_cast<int>(*col)}};
}

/// The game's event vocabulary, interned once at program construction,
/// with id lookups and the aggregate event lists threads declare against.
class GameEvents {
 public:
  GameEvents(Geometry geometry, sbp::EventRegistry& registry) : geometry_(geometry) {
    geometry_.validate();
    for (Color color : {Color::Yellow, Color::Red}) {
      auto& ids = place_[color == Color::Yellow ? 0 : 1];
      for (int r = 0; r < geometry_.rows; ++r) {
        for (int c = 0; c < geometry_.cols; ++c) {
          const EventId id = registry.intern(place_event(color, {r, c}));
          ids.push_back(id);
          remember(id, Placement{color, {r, c}});
        }
      }
      win_[color == Color::Yellow ? 0 : 1] = registry.intern(win_event(color));
    }
    draw_ = registry.intern(draw_event());
    request_input_ = registry.intern(request_user_input_event());

    yellow_ = EventSet(place_[0]);
    red_ = EventSet(place_[1]);
    placements_ = yellow_;
    placements_.merge(red_);
    terminals_ = EventSet{win_[0], win_[1], draw_};
    all_ = placements_;
    all_.merge(terminals_);
    all_.insert(request_input_);
  }

  static std::shared_ptr<const GameEvents> create(Geometry geometry, sbp::EventRegistry& registry) {
    return std::make_shared<const GameEvents>(geometry, registry);
  }

  const Geometry& geometry() const noexcept { return geometry_; }

  EventId place(Color color, Position p) const {
    if (!geometry_.contains(p)) throw std::out_of_range("placement off the board");
    return place_[color == Color::Yellow ? 0 : 1][static_cast<std::size_t>(p.row * geometry_.cols + p.col)];
  }
  EventId win(Color color) const noexcept { return win_[color == Color::Yellow ? 0 : 1]; }
  EventId draw() const noexcept { return draw_; }
  EventId request_user_input() const noexcept { return request_input_; }

  std::optional<Placement> placement(EventId id) const noexcept {
    const auto i = sbp::index(id);
    return i < decode_.size() ? decode_[i] : std::nullopt;
  }

  std::optional<Color> winner(EventId id) const noexcept {
    if (id == win_[0]) return Color::Yellow;
    if (id == win_[1]) return Color::Red;
    return std::nullopt;
  }

  bool is_terminal(EventId id) const noexcept { return id == win_[0] || id == win_[1] || id == draw_; }

  const EventSet& placements(Color color) const noexcept {
    return color == Color::Yellow ? yellow_ : red_;
  }
  const EventSet& all_placements() const noexcept { return placements_; }
  /// Win(Y), Win(R), Draw.
  const EventSet& terminals() const noexcept { return terminals_; }
  /// Every game event, including RequestUserInput.
  const EventSet& all_events() const noexcept { return all_; }

  /// Both colors' placements into `col`.
  EventSet column(Color color, int col) const {
    EventSet out;
    for (int r = 0; r < geometry_.rows; ++r) out.insert(place(color, {r, col}));
    return out;
  }

 private:
  void remember(EventId id, Placement p) {
    const auto i = sbp::index(id);
    if (i >= decode_.size()) decode_.resize(i + 1);
    decode_[i] = p;
  }

  Geometry geometry_;
  std::vector<EventId> place_[2];
  EventId win_[2]{};
  EventId draw_{};
  EventId request_input_{};
  std::vector<std::optional<Placement>> decode_;
  EventSet yellow_, red_, placements_, terminals_, all_;
};

}  // namespace connect4
