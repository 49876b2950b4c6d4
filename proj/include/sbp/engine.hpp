#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbp/detail/hash.hpp"
#include "sbp/program.hpp"
#include "sbp/selection.hpp"

namespace sbp {

/// Raised when a thread's declare or advance throws. The engine halts.
class ThreadFault : public std::runtime_error {
 public:
  ThreadFault(std::string thread, std::size_t step, const std::string& what)
      : std::runtime_error("thread '" + thread + "' failed at step " + std::to_string(step) + ": " +
                           what),
        thread_(std::move(thread)),
        step_(step) {}

  const std::string& thread() const noexcept { return thread_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::string thread_;
  std::size_t step_;
};

/// Fixed-width digest of a whole program configuration.
struct StateKey {
  std::uint64_t digest = 0;
  friend bool operator==(StateKey, StateKey) = default;
  friend auto operator<=>(StateKey, StateKey) = default;
};

/// A program paused at a synchronization point: every thread's state plus
/// its current declaration. Slots live in copy-on-write chunks, so copying
/// a configuration and advancing the copy only clones the chunks whose
/// threads resumed. A configuration and its copies must stay on one
/// execution context.
class Configuration {
 public:
  struct Slot {
    ScenarioThread thread;
    std::optional<MultiSync> sync;  // empty once the thread is done
    std::uint64_t name_hash = 0;
    std::uint64_t state_hash = 0;
  };

  explicit Configuration(const Program& program) : registry_(program.shared_registry()) {
    std::shared_ptr<Chunk> chunk;
    for (const auto& t : program.threads()) {
      if (!chunk || chunk->size() == kChunk) {
        chunk = std::make_shared<Chunk>();
        chunk->reserve(kChunk);
        chunks_.push_back(chunk);
      }
      Slot s{t, std::nullopt, detail::hash_bytes(t.name()), 0};
      refresh(s);
      sum_ += term(s);
      chunk->push_back(std::move(s));
      ++size_;
    }
  }

  const EventRegistry& registry() const noexcept { return *registry_; }
  std::size_t size() const noexcept { return size_; }
  const Slot& slot(std::size_t i) const { return (*chunks_[i / kChunk])[i % kChunk]; }
  std::size_t step_index() const noexcept { return steps_; }

  template <class F>
  void for_each_slot(F&& f) const {
    for (const auto& c : chunks_) {
      for (const auto& s : *c) f(s);
    }
  }

  bool all_done() const noexcept {
    for (const auto& c : chunks_) {
      for (const auto& s : *c) {
        if (s.sync) return false;
      }
    }
    return true;
  }

  std::vector<ThreadDeclaration> declarations() const {
    std::vector<ThreadDeclaration> out;
    out.reserve(size_);
    for_each_slot([&](const Slot& s) {
      if (s.sync) out.push_back({s.thread.name(), &*s.sync});
    });
    return out;
  }

  void collect(PriorityMap& map) const {
    for_each_slot([&](const Slot& s) {
      if (s.sync) map.add(*s.sync);
    });
  }

  std::vector<EligibleEvent> eligible() const {
    thread_local PriorityMap map;
    map.clear();
    collect(map);
    return eligible_events(map);
  }

  /// Resumes exactly the threads whose declaration waits for or requests
  /// `event`. Returns how many threads advanced.
  std::size_t advance(EventId event) {
    std::size_t resumed = 0;
    for (auto& chunk : chunks_) {
      std::size_t k = 0;
      while (k < chunk->size() && !wakes((*chunk)[k], event)) ++k;
      if (k == chunk->size()) continue;
      if (chunk.use_count() > 1) chunk = std::make_shared<Chunk>(*chunk);
      for (; k < chunk->size(); ++k) {
        Slot& s = (*chunk)[k];
        if (!wakes(s, event)) continue;
        sum_ -= term(s);
        try {
          s.thread = s.thread.advanced(event);
        } catch (const ThreadFault&) {
          throw;
        } catch (const std::exception& ex) {
          throw ThreadFault(s.thread.name(), steps_, ex.what());
        }
        refresh(s);
        sum_ += term(s);
        ++resumed;
      }
    }
    ++steps_;
    return resumed;
  }

  /// Maintained incrementally: a sum of per-thread hashes over
  /// (name, state, done flag).
  StateKey digest() const noexcept { return {detail::mix64(sum_ ^ detail::mix64(size_))}; }

  /// Full serialization: names, states and done flags.
  void encode(StateEncoder& enc) const {
    for_each_slot([&](const Slot& s) {
      enc.put_bytes(s.thread.name());
      StateEncoder inner;
      s.thread.encode(inner);
      enc.put_bytes(inner.bytes());
      enc.put(s.sync ? 1u : 0u);
    });
  }

  /// Deep structural comparison of thread states, independent of encoding.
  bool same_state(const Configuration& other) const {
    if (size_ != other.size_) return false;
    for (std::size_t i = 0; i < size_; ++i) {
      const Slot& a = slot(i);
      const Slot& b = other.slot(i);
      if (a.sync.has_value() != b.sync.has_value()) return false;
      if (!a.thread.same_state(b.thread)) return false;
    }
    return true;
  }

  const ScenarioThread* find_thread(std::string_view name) const {
    for (const auto& c : chunks_) {
      for (const auto& s : *c) {
        if (s.thread.name() == name) return &s.thread;
      }
    }
    return nullptr;
  }

 private:
  static constexpr std::size_t kChunk = 32;
  using Chunk = std::vector<Slot>;

  static bool wakes(const Slot& s, EventId event) noexcept { return s.sync && resumes(*s.sync, event); }

  void refresh(Slot& s) {
    try {
      s.sync = s.thread.declare();
    } catch (const std::exception& ex) {
      throw ThreadFault(s.thread.name(), steps_, ex.what());
    }
    thread_local StateEncoder scratch;
    scratch.clear();
    s.thread.encode(scratch);
    s.state_hash = detail::hash_bytes(scratch.bytes());
  }

  static std::uint64_t term(const Slot& s) noexcept {
    return detail::mix64(detail::mix64(s.name_hash) ^ s.state_hash ^ (s.sync ? 0x5bd1e995u : 0u));
  }

  std::shared_ptr<const EventRegistry> registry_;
  std::vector<std::shared_ptr<Chunk>> chunks_;
  std::size_t size_ = 0;
  std::uint64_t sum_ = 0;
  std::size_t steps_ = 0;
};

enum class StopReason { NoEligibleEvent, AllThreadsDone, MaxSteps };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::NoEligibleEvent: return "no-eligible-event";
    case StopReason::AllThreadsDone: return "all-threads-done";
    case StopReason::MaxSteps: return "max-steps";
  }
  return "?";
}

struct RunOptions {
  std::size_t max_steps = std::numeric_limits<std::size_t>::max();
  /// Called after each selection, before threads are resumed.
  std::function<void(std::size_t step, const SelectionOutcome&)> on_step;
};

struct RunResult {
  Trace trace;
  std::vector<SelectionOutcome> outcomes;
  StopReason reason = StopReason::NoEligibleEvent;
};

/// Drives the program through synchronization points until no event is
/// eligible, every thread is done, or `max_steps` events were selected.
inline RunResult run(const Program& program, const RunOptions& options = {}) {
  RunResult result;
  Configuration config(program);
  TieBreaker ties(program.tie_break());
  while (true) {
    if (config.all_done()) {
      result.reason = StopReason::AllThreadsDone;
      break;
    }
    if (result.trace.size() >= options.max_steps) {
      result.reason = StopReason::MaxSteps;
      break;
    }
    const auto decls = config.declarations();
    auto outcome = select_event(decls, program.registry(), ties);
    if (!outcome.id) {
      result.reason = StopReason::NoEligibleEvent;
      break;
    }
    if (options.on_step) options.on_step(result.trace.size(), outcome);
    const EventId chosen = *outcome.id;
    result.trace.events.push_back(*outcome.selected);
    result.outcomes.push_back(std::move(outcome));
    config.advance(chosen);
  }
  return result;
}

enum class ReplayMode {
  /// Each event must be among the top-priority eligible events, i.e. a
  /// choice the tie-break could have made.
  TieBreak,
  /// Each event only needs to be eligible (traces from AllEligible search).
  Eligible,
};

struct ReplayResult {
  bool ok = false;
  std::optional<std::size_t> divergence;
  std::string reason;
  explicit operator bool() const noexcept { return ok; }
};

/// Re-runs the program forcing each selection to follow `trace`.
inline ReplayResult replay(const Program& program, const Trace& trace,
                           ReplayMode mode = ReplayMode::TieBreak) {
  Configuration config(program);
  const auto& registry = program.registry();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& expected = trace.events[i];
    auto fail = [&](std::string why) {
      return ReplayResult{false, i, "step " + std::to_string(i) + " (" + expected.to_string() + "): " + why};
    };
    const auto id = registry.find(expected);
    if (!id) return fail("event unknown to the program");
    const auto eligible = config.eligible();
    if (mode == ReplayMode::TieBreak) {
      const auto top = top_priority_events(eligible, registry);
      if (std::ranges::find(top, *id) == top.end()) return fail("not a top-priority eligible event");
    } else if (std::ranges::find(eligible, *id, &EligibleEvent::event) == eligible.end()) {
      return fail("not eligible");
    }
    config.advance(*id);
  }
  return {true, std::nullopt, {}};
}

}  // namespace sbp
