#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <ranges>
#include <stdexcept>
#include <vector>

#include "sbp/event.hpp"

namespace sbp {

/// Request and block priorities. "Infinite" blocking is expressed through
/// hard blocks, never through a sentinel value.
using Priority = std::int64_t;

/// Sorted set of event ids.
class EventSet {
 public:
  using const_iterator = std::vector<EventId>::const_iterator;

  EventSet() = default;
  EventSet(std::initializer_list<EventId> ids) : ids_(ids) { normalize(); }

  template <std::ranges::input_range R>
    requires std::convertible_to<std::ranges::range_value_t<R>, EventId>
  explicit EventSet(R&& ids) : ids_(std::ranges::begin(ids), std::ranges::end(ids)) {
    normalize();
  }

  bool contains(EventId id) const noexcept { return std::ranges::binary_search(ids_, id); }
  bool empty() const noexcept { return ids_.empty(); }
  std::size_t size() const noexcept { return ids_.size(); }
  const_iterator begin() const noexcept { return ids_.begin(); }
  const_iterator end() const noexcept { return ids_.end(); }

  void insert(EventId id) {
    auto it = std::ranges::lower_bound(ids_, id);
    if (it == ids_.end() || *it != id) ids_.insert(it, id);
  }

  void merge(const EventSet& other) {
    std::vector<EventId> out;
    out.reserve(ids_.size() + other.ids_.size());
    std::ranges::set_union(ids_, other.ids_, std::back_inserter(out));
    ids_ = std::move(out);
  }

  friend bool intersects(const EventSet& a, const EventSet& b) noexcept {
    auto i = a.ids_.begin();
    auto j = b.ids_.begin();
    while (i != a.ids_.end() && j != b.ids_.end()) {
      if (*i < *j) {
        ++i;
      } else if (*j < *i) {
        ++j;
      } else {
        return true;
      }
    }
    return false;
  }

  friend bool operator==(const EventSet&, const EventSet&) = default;

 private:
  void normalize() {
    std::ranges::sort(ids_);
    auto [first, last] = std::ranges::unique(ids_);
    ids_.erase(first, last);
  }

  std::vector<EventId> ids_;
};

/// One sync statement: what a thread waits for, requests, soft-blocks and
/// hard-blocks at a synchronization point.
struct SyncDeclaration {
  EventSet wait_for;
  EventSet request;
  EventSet soft_block;
  EventSet hard_block;
  Priority request_priority = 0;
  Priority block_priority = 0;

  friend bool operator==(const SyncDeclaration&, const SyncDeclaration&) = default;
};

/// Arguments for make_sync. `block` is the classical blocking argument and
/// maps onto hard_block.
struct SyncArgs {
  EventSet wait_for;
  EventSet request;
  EventSet soft_block;
  EventSet hard_block;
  EventSet block;
  Priority request_priority = 0;
  Priority block_priority = 0;
};

class InvalidDeclaration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline SyncDeclaration make_sync(SyncArgs args) {
  SyncDeclaration d{std::move(args.wait_for), std::move(args.request), std::move(args.soft_block),
                    std::move(args.hard_block), args.request_priority, args.block_priority};
  if (!args.block.empty()) d.hard_block.merge(args.block);
  if (intersects(d.request, d.hard_block)) {
    throw InvalidDeclaration("a sync statement may not request an event it hard-blocks");
  }
  return d;
}

/// A yield point carrying one or more sync statements. A single-statement
/// MultiSync is a plain sync.
class MultiSync {
 public:
  MultiSync() : statements_(std::make_shared<const std::vector<SyncDeclaration>>(1)) {}
  MultiSync(SyncDeclaration statement)
      : statements_(std::make_shared<const std::vector<SyncDeclaration>>(1, std::move(statement))) {}
  explicit MultiSync(std::vector<SyncDeclaration> statements) {
    if (statements.empty()) throw InvalidDeclaration("a multi-sync needs at least one statement");
    statements_ = std::make_shared<const std::vector<SyncDeclaration>>(std::move(statements));
  }

  /// Statements are immutable and shared between copies.
  const std::vector<SyncDeclaration>& statements() const noexcept { return *statements_; }

  friend bool operator==(const MultiSync& a, const MultiSync& b) {
    return a.statements_ == b.statements_ || *a.statements_ == *b.statements_;
  }

 private:
  std::shared_ptr<const std::vector<SyncDeclaration>> statements_;
};

/// What a thread declares at its current synchronization point; nullopt
/// means the thread has finished.
using Yield = std::optional<MultiSync>;

/// A thread moves past its yield point iff the selected event is waited
/// for or requested by any of its statements. Blocking never resumes.
inline bool resumes(const MultiSync& sync, EventId event) noexcept {
  return std::ranges::any_of(sync.statements(), [event](const SyncDeclaration& s) {
    return s.wait_for.contains(event) || s.request.contains(event);
  });
}

}  // namespace sbp
