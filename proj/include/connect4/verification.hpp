#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "connect4/agent.hpp"
#include "connect4/match.hpp"
#include "sbp/verify.hpp"

namespace connect4 {

enum class Property { NoIllegalMove, RedNeverWins, YellowAlwaysWins };

inline const char* to_string(Property p) {
  switch (p) {
    case Property::NoIllegalMove: return "no-illegal-move";
    case Property::RedNeverWins: return "red-never-wins";
    case Property::YellowAlwaysWins: return "yellow-always-wins";
  }
  return "?";
}

inline std::optional<Property> parse_property(std::string_view s) {
  for (auto p : {Property::NoIllegalMove, Property::RedNeverWins, Property::YellowAlwaysWins}) {
    if (s == to_string(p)) return p;
  }
  return std::nullopt;
}

/// Per-id decoding cache over a registry, filled lazily. Ids are stable
/// across programs from the same deterministic factory.
class PathDecoder {
 public:
  struct Info {
    std::optional<Placement> placement;
    bool terminal = false;
    bool red_win = false;
    bool yellow_win = false;
  };

  const Info& info(EventId id, const sbp::EventRegistry& registry) {
    const auto i = sbp::index(id);
    if (i >= cache_.size()) cache_.resize(i + 1);
    auto& slot = cache_[i];
    if (!slot) {
      const Event& e = registry.event(id);
      Info in;
      in.placement = decode_placement(e);
      in.yellow_win = e == win_event(Color::Yellow);
      in.red_win = e == win_event(Color::Red);
      in.terminal = in.yellow_win || in.red_win || e == draw_event();
      slot = in;
    }
    return *slot;
  }

 private:
  std::vector<std::optional<Info>> cache_;
};

/// True when the path's last event breaks gravity, alternation from yellow
/// or post-terminal silence. Earlier events were checked when appended.
inline bool last_event_illegal(const sbp::PathView& path, PathDecoder& dec, const Geometry& g) {
  const auto n = path.size();
  const auto& last = dec.info(path.events[n - 1], path.registry);
  std::array<int, kMaxCols> heights{};
  int placements = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto& in = dec.info(path.events[i], path.registry);
    if (in.terminal) return true;
    if (in.placement) {
      ++heights[static_cast<std::size_t>(in.placement->pos.col)];
      ++placements;
    }
  }
  if (!last.placement) return false;
  const auto& p = *last.placement;
  if (!g.contains(p.pos)) return true;
  if (p.pos.row != heights[static_cast<std::size_t>(p.pos.col)]) return true;
  const Color expected = placements % 2 == 0 ? Color::Yellow : Color::Red;
  return p.color != expected;
}

struct VerifyOptions {
  Property property = Property::NoIllegalMove;
  sbp::Branching branching = sbp::Branching::MaxPriorityEligible;
  /// Defaults to capacity + 1: every placement plus the terminal event.
  std::optional<std::size_t> max_depth;
  std::size_t max_states = 1'000'000;
  bool exact_states = false;
};

/// Verification program: the agent against adversarial red, with an
/// optional forced opening.
inline sbp::VerificationTask verification_task(const AgentConfig& config, const VerifyOptions& opts,
                                               const std::vector<Event>& prefix = {}) {
  sbp::VerificationTask task;
  task.program_factory = [config, prefix] { return build_agent_program(config, AdversarialRed{}, prefix); };
  task.branching = opts.branching;
  task.max_depth = opts.max_depth.value_or(static_cast<std::size_t>(config.geometry.capacity()) + 1);
  task.max_states = opts.max_states;
  task.exact_states = opts.exact_states;

  auto dec = std::make_shared<PathDecoder>();
  const Geometry g = config.geometry;
  switch (opts.property) {
    case Property::NoIllegalMove:
      task.unsafe = [dec, g](const sbp::PathView& p) { return last_event_illegal(p, *dec, g); };
      break;
    case Property::RedNeverWins:
      task.unsafe = [dec](const sbp::PathView& p) { return dec->info(p.last(), p.registry).red_win; };
      break;
    case Property::YellowAlwaysWins:
      task.unsafe = [dec](const sbp::PathView& p) {
        const auto& in = dec->info(p.last(), p.registry);
        return in.terminal && !in.yellow_win;
      };
      // a maximal trace must end in yellow's win; a stall counts as failure
      task.unsafe_leaf = [dec](const sbp::PathView& p) {
        return p.size() == 0 || !dec->info(p.last(), p.registry).yellow_win;
      };
      break;
  }
  return task;
}

/// Placements of a trace, without RequestUserInput and terminal events.
inline std::vector<Event> placements_of(const sbp::Trace& trace) {
  std::vector<Event> out;
  for (const auto& e : trace.events) {
    if (decode_placement(e)) out.push_back(e);
  }
  return out;
}

struct PrefixProof {
  std::vector<Event> prefix;
  sbp::VerificationResult result;
  std::uint64_t source_seed = 0;
};

struct PrefixSearchOptions {
  std::size_t wanted = 2;
  std::size_t min_length = 8;
  /// Games against seeded random red to draw candidate openings from.
  std::size_t games = 50;
  std::uint64_t base_seed = 1;
  std::size_t max_states = 200'000;
};

/// Openings of yellow-won games, tried from `min_length` plies upward,
/// until yellow-always-wins verifies Safe. One proof per source game.
inline std::vector<PrefixProof> search_winning_prefixes(const AgentConfig& config, const PrefixSearchOptions& o) {
  std::vector<PrefixProof> proofs;
  for (std::size_t gi = 0; gi < o.games && proofs.size() < o.wanted; ++gi) {
    const std::uint64_t seed = o.base_seed + gi;
    const auto rec = play_match(config, random_policy(seed), config.geometry.capacity());
    if (rec.fault || rec.result != MatchResult::YellowWin) continue;
    const auto moves = placements_of(rec.trace);
    for (std::size_t k = o.min_length; k <= moves.size(); ++k) {
      const std::vector<Event> prefix(moves.begin(), moves.begin() + static_cast<std::ptrdiff_t>(k));
      VerifyOptions vo;
      vo.property = Property::YellowAlwaysWins;
      vo.max_states = o.max_states;
      auto result = sbp::explore(verification_task(config, vo, prefix));
      if (result.verdict == sbp::Verdict::Safe) {
        proofs.push_back({prefix, std::move(result), seed});
        break;
      }
    }
  }
  return proofs;
}

}  // namespace connect4
