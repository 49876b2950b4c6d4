#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sbp/event.hpp"
#include "sbp/sync.hpp"

namespace sbp {

/// One thread's declaration at a synchronization point.
struct ThreadDeclaration {
  std::string_view thread;
  const MultiSync* sync = nullptr;
};

/// Effective priorities of one event, combined over all declarations.
/// `request` is the maximum request priority (absent if unrequested);
/// `soft_block` the maximum soft-block priority; `hard_block` is absolute.
struct EventPriority {
  std::optional<Priority> request;
  std::optional<Priority> soft_block;
  bool hard_block = false;

  /// Requested, and either unblocked or soft-blocked strictly below the
  /// request priority. Ties go to the block.
  bool eligible() const noexcept {
    if (!request || hard_block) return false;
    return !soft_block || *request > *soft_block;
  }

  friend bool operator==(const EventPriority&, const EventPriority&) = default;
};

/// Event -> (R, B) table, stored densely by event id.
class PriorityMap {
 public:
  void add(const MultiSync& sync) {
    for (const auto& s : sync.statements()) {
      for (EventId e : s.request) {
        auto& p = slot(e);
        p.request = p.request ? std::max(*p.request, s.request_priority) : s.request_priority;
      }
      for (EventId e : s.soft_block) {
        auto& p = slot(e);
        p.soft_block = p.soft_block ? std::max(*p.soft_block, s.block_priority) : s.block_priority;
      }
      for (EventId e : s.hard_block) slot(e).hard_block = true;
    }
  }

  const EventPriority* find(EventId e) const noexcept {
    if (index(e) >= slots_.size() || !present_[index(e)]) return nullptr;
    return &slots_[index(e)];
  }

  /// Events with at least one request or block, in first-touch order.
  const std::vector<EventId>& events() const noexcept { return touched_; }

  void clear() noexcept {
    for (EventId e : touched_) {
      slots_[index(e)] = {};
      present_[index(e)] = false;
    }
    touched_.clear();
  }

 private:
  EventPriority& slot(EventId e) {
    const auto i = index(e);
    if (i >= slots_.size()) {
      slots_.resize(i + 1);
      present_.resize(i + 1, false);
    }
    if (!present_[i]) {
      present_[i] = true;
      touched_.push_back(e);
    }
    return slots_[i];
  }

  std::vector<EventPriority> slots_;
  std::vector<bool> present_;
  std::vector<EventId> touched_;
};

inline PriorityMap effective_priorities(std::span<const ThreadDeclaration> declarations) {
  PriorityMap map;
  for (const auto& d : declarations) map.add(*d.sync);
  return map;
}

struct EligibleEvent {
  EventId event;
  Priority priority;
  friend bool operator==(const EligibleEvent&, const EligibleEvent&) = default;
};

/// Eligible events sorted by id.
inline std::vector<EligibleEvent> eligible_events(const PriorityMap& map) {
  std::vector<EligibleEvent> out;
  for (EventId e : map.events()) {
    const auto* p = map.find(e);
    if (p->eligible()) out.push_back({e, *p->request});
  }
  std::ranges::sort(out, {}, &EligibleEvent::event);
  return out;
}

/// Eligible events tied at the maximal request priority, sorted by the
/// event total order.
inline std::vector<EventId> top_priority_events(std::span<const EligibleEvent> eligible,
                                                const EventRegistry& registry) {
  std::vector<EventId> top;
  if (eligible.empty()) return top;
  const Priority best = std::ranges::max(eligible, {}, &EligibleEvent::priority).priority;
  for (const auto& e : eligible) {
    if (e.priority == best) top.push_back(e.event);
  }
  std::ranges::sort(top, [&](EventId a, EventId b) { return registry.less(a, b); });
  return top;
}

struct EventOrder {
  friend bool operator==(EventOrder, EventOrder) = default;
};
struct SeededRandom {
  std::uint64_t seed = 0;
  friend bool operator==(SeededRandom, SeededRandom) = default;
};

/// How ties among equally prioritized eligible events are resolved.
using TieBreak = std::variant<EventOrder, SeededRandom>;

/// Stateful tie resolution for one run.
class TieBreaker {
 public:
  explicit TieBreaker(TieBreak mode = EventOrder{}) : mode_(mode) {
    if (const auto* r = std::get_if<SeededRandom>(&mode_)) rng_.seed(r->seed);
  }

  /// `tied` must be sorted by the event total order.
  EventId choose(std::span<const EventId> tied) {
    if (std::holds_alternative<EventOrder>(mode_) || tied.size() == 1) return tied.front();
    std::uniform_int_distribution<std::size_t> pick(0, tied.size() - 1);
    return tied[pick(rng_)];
  }

 private:
  TieBreak mode_;
  std::mt19937_64 rng_;
};

struct Contribution {
  std::string thread;
  Priority priority = 0;
  friend bool operator==(const Contribution&, const Contribution&) = default;
};

/// The engine's verdict at one synchronization point.
struct SelectionOutcome {
  std::optional<EventId> id;
  std::optional<Event> selected;
  Priority effective_request_priority = 0;
  std::vector<Contribution> requesters;
  /// Threads that only wait for the selected event.
  std::vector<std::string> waiters;
  /// Soft blocks on the selected event that the request outranked.
  std::vector<Contribution> overridden_blocks;
  std::string explanation;
};

/// Fills in who requested, waited for and soft-blocked `event`.
inline SelectionOutcome describe_selection(std::span<const ThreadDeclaration> declarations,
                                           const EventRegistry& registry, EventId event) {
  SelectionOutcome out;
  out.id = event;
  out.selected = registry.event(event);
  bool have_priority = false;
  for (const auto& d : declarations) {
    std::optional<Priority> requested;
    std::optional<Priority> blocked;
    bool waited = false;
    for (const auto& s : d.sync->statements()) {
      if (s.request.contains(event)) {
        requested = requested ? std::max(*requested, s.request_priority) : s.request_priority;
      }
      if (s.soft_block.contains(event)) {
        blocked = blocked ? std::max(*blocked, s.block_priority) : s.block_priority;
      }
      waited = waited || s.wait_for.contains(event);
    }
    if (requested) {
      out.requesters.push_back({std::string(d.thread), *requested});
      if (!have_priority || *requested > out.effective_request_priority) {
        out.effective_request_priority = *requested;
        have_priority = true;
      }
    } else if (waited) {
      out.waiters.emplace_back(d.thread);
    }
    if (blocked) out.overridden_blocks.push_back({std::string(d.thread), *blocked});
  }
  std::ranges::stable_sort(out.requesters, std::ranges::greater{}, &Contribution::priority);

  std::string text = out.selected->to_string() + " at priority " +
                     std::to_string(out.effective_request_priority) + "; requested by ";
  for (std::size_t i = 0; i < out.requesters.size(); ++i) {
    if (i) text += ", ";
    text += out.requesters[i].thread + "@" + std::to_string(out.requesters[i].priority);
  }
  if (!out.overridden_blocks.empty()) {
    text += "; overrides soft block by ";
    for (std::size_t i = 0; i < out.overridden_blocks.size(); ++i) {
      if (i) text += ", ";
      text += out.overridden_blocks[i].thread + "@" +
              std::to_string(out.overridden_blocks[i].priority);
    }
  }
  out.explanation = std::move(text);
  return out;
}

/// Picks among the eligible events one with maximal effective request
/// priority. An empty outcome means no event is eligible.
inline SelectionOutcome select_event(std::span<const ThreadDeclaration> declarations,
                                     const EventRegistry& registry, TieBreaker& ties) {
  const auto map = effective_priorities(declarations);
  const auto eligible = eligible_events(map);
  if (eligible.empty()) {
    SelectionOutcome none;
    none.explanation = "no eligible event";
    return none;
  }
  const auto top = top_priority_events(eligible, registry);
  return describe_selection(declarations, registry, ties.choose(top));
}

}  // namespace sbp
