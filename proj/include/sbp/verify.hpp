#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "sbp/engine.hpp"
#include "sbp/program.hpp"

namespace sbp {

/// Digest of (thread name, serialized state, done flag) for all threads.
inline StateKey snapshot(const Configuration& config) { return config.digest(); }
inline StateKey snapshot(const Program& program) { return Configuration(program).digest(); }

enum class Branching {
  /// Branch over eligible events tied at the maximal request priority.
  MaxPriorityEligible,
  /// Branch over every eligible event.
  AllEligible,
};

enum class Verdict { Safe, Counterexample, BoundExceeded };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Safe: return "Safe";
    case Verdict::Counterexample: return "Counterexample";
    case Verdict::BoundExceeded: return "BoundExceeded";
  }
  return "?";
}

/// The event path from the initial state to the state under test.
struct PathView {
  std::span<const EventId> events;
  const EventRegistry& registry;

  EventId last() const { return events.back(); }
  const Event& last_event() const { return registry.event(events.back()); }
  const Event& operator[](std::size_t i) const { return registry.event(events[i]); }
  std::size_t size() const noexcept { return events.size(); }
};

using UnsafePredicate = std::function<bool(const PathView&)>;

struct VerificationTask {
  std::function<Program()> program_factory;
  /// Checked after every transition.
  UnsafePredicate unsafe;
  /// Checked on states with no eligible event, i.e. at the end of every
  /// maximal trace. Revisited states are pruned, so both predicates should
  /// be determined by the reached state.
  UnsafePredicate unsafe_leaf;
  Branching branching = Branching::MaxPriorityEligible;
  std::size_t max_depth = 42;
  std::size_t max_states = 1'000'000;
  /// Guard digest collisions by keeping full serialized states.
  bool exact_states = false;
};

struct VerificationResult {
  Verdict verdict = Verdict::Safe;
  std::optional<Trace> counterexample;
  std::size_t states_visited = 0;
  std::size_t max_depth_reached = 0;
  double elapsed_ms = 0;
};

class VerificationFault : public std::runtime_error {
 public:
  VerificationFault(const ThreadFault& fault, Trace prefix)
      : std::runtime_error(fault.what()), prefix_(std::move(prefix)) {}
  const Trace& prefix() const noexcept { return prefix_; }

 private:
  Trace prefix_;
};

namespace detail {

inline Trace to_trace(std::span<const EventId> path, const EventRegistry& registry) {
  Trace t;
  t.events.reserve(path.size());
  for (EventId e : path) t.events.push_back(registry.event(e));
  return t;
}

inline std::vector<EventId> branches(const Configuration& config, Branching mode) {
  const auto eligible = config.eligible();
  if (mode == Branching::MaxPriorityEligible) return top_priority_events(eligible, config.registry());
  std::vector<EventId> all;
  all.reserve(eligible.size());
  for (const auto& e : eligible) all.push_back(e.event);
  std::ranges::sort(all, [&](EventId a, EventId b) { return config.registry().less(a, b); });
  return all;
}

/// Visited set keyed by digest, or by full serialization in exact mode.
/// Remembers the shallowest depth each state was reached at, so a state
/// first seen deep is re-expanded when later reached with more budget.
class VisitedSet {
 public:
  explicit VisitedSet(bool exact) : exact_(exact) {}

  /// True if the state is new or now reached at a smaller depth.
  bool admit(const Configuration& config, std::size_t depth) {
    if (exact_) {
      StateEncoder enc;
      config.encode(enc);
      return admit_in(full_, enc.bytes(), depth);
    }
    return admit_in(digests_, config.digest().digest, depth);
  }

  std::size_t size() const noexcept { return exact_ ? full_.size() : digests_.size(); }

 private:
  template <class Map, class Key>
  static bool admit_in(Map& map, const Key& key, std::size_t depth) {
    auto [it, inserted] = map.try_emplace(key, depth);
    if (inserted) return true;
    if (depth < it->second) {
      it->second = depth;
      return true;
    }
    return false;
  }

  bool exact_;
  std::unordered_map<std::uint64_t, std::size_t> digests_;
  std::unordered_map<std::string, std::size_t> full_;
};

}  // namespace detail

/// Depth-first explicit-state search for a transition satisfying `unsafe`.
inline VerificationResult explore(const VerificationTask& task) {
  const auto started = std::chrono::steady_clock::now();
  auto finish = [&](VerificationResult r) {
    r.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return r;
  };

  const Program program = task.program_factory();
  if (snapshot(task.program_factory()) != snapshot(program)) {
    throw std::invalid_argument("program factory is not deterministic");
  }
  const auto& registry = program.registry();

  struct Frame {
    Configuration config;
    std::vector<EventId> branches;
    std::size_t next = 0;
  };

  VerificationResult result;
  detail::VisitedSet visited(task.exact_states);
  std::vector<EventId> path;
  std::vector<Frame> stack;
  bool bound_hit = false;

  try {
    Configuration root(program);
    visited.admit(root, 0);
    auto root_branches = detail::branches(root, task.branching);
    if (root_branches.empty()) {
      if (task.unsafe_leaf && task.unsafe_leaf(PathView{path, registry})) {
        result.verdict = Verdict::Counterexample;
        result.counterexample = Trace{};
        result.states_visited = visited.size();
        return finish(std::move(result));
      }
    } else {
      if (task.max_depth == 0) {
        bound_hit = true;
      } else {
        stack.push_back({std::move(root), std::move(root_branches)});
      }
    }

    while (!stack.empty()) {
      Frame& frame = stack.back();
      if (frame.next == frame.branches.size()) {
        // path holds one event per frame below the root
        stack.pop_back();
        if (!path.empty()) path.pop_back();
        continue;
      }
      const EventId event = frame.branches[frame.next++];
      Configuration child = frame.config;
      path.push_back(event);
      child.advance(event);
      const std::size_t depth = path.size();
      result.max_depth_reached = std::max(result.max_depth_reached, depth);

      if (task.unsafe && task.unsafe(PathView{path, registry})) {
        result.verdict = Verdict::Counterexample;
        result.counterexample = detail::to_trace(path, registry);
        result.states_visited = visited.size();
        return finish(std::move(result));
      }
      if (!visited.admit(child, depth)) {
        path.pop_back();
        continue;
      }
      if (visited.size() > task.max_states) {
        result.verdict = Verdict::BoundExceeded;
        result.states_visited = visited.size();
        return finish(std::move(result));
      }
      auto next = detail::branches(child, task.branching);
      if (next.empty()) {
        if (task.unsafe_leaf && task.unsafe_leaf(PathView{path, registry})) {
          result.verdict = Verdict::Counterexample;
          result.counterexample = detail::to_trace(path, registry);
          result.states_visited = visited.size();
          return finish(std::move(result));
        }
        path.pop_back();
        continue;
      }
      if (depth >= task.max_depth) {
        bound_hit = true;
        path.pop_back();
        continue;
      }
      stack.push_back({std::move(child), std::move(next)});
    }
  } catch (const ThreadFault& fault) {
    throw VerificationFault(fault, detail::to_trace(path, registry));
  }

  result.verdict = bound_hit ? Verdict::BoundExceeded : Verdict::Safe;
  result.states_visited = visited.size();
  return finish(std::move(result));
}

inline nlohmann::json summary_json(const VerificationResult& r) {
  return {{"verdict", to_string(r.verdict)},
          {"statesVisited", r.states_visited},
          {"maxDepthReached", r.max_depth_reached},
          {"elapsedMs", static_cast<std::int64_t>(r.elapsed_ms)}};
}

/// Pins the first events of every trace: at step i it requests prefix[i]
/// at `priority` and hard-blocks every other event of `controlled`; once
/// the prefix is consumed it is done.
struct ForcedPrefixBehavior {
  using State = std::uint32_t;
  std::vector<EventId> prefix;
  EventSet controlled;
  Priority priority = 0;

  State initial() const { return 0; }

  Yield declare(State step) const {
    if (step >= prefix.size()) return std::nullopt;
    const EventId next = prefix[step];
    std::vector<EventId> others;
    others.reserve(controlled.size());
    for (EventId e : controlled) {
      if (e != next) others.push_back(e);
    }
    return MultiSync(make_sync({.request = {next},
                                .hard_block = EventSet(others),
                                .request_priority = priority}));
  }

  State advance(State step, EventId) const { return step + 1; }
};

inline ScenarioThread forced_prefix_thread(std::vector<EventId> prefix, EventSet controlled,
                                           Priority priority, std::string name = "forced_prefix") {
  if (prefix.empty()) throw std::invalid_argument("forced prefix must be nonempty");
  return ScenarioThread(std::move(name),
                        ForcedPrefixBehavior{std::move(prefix), std::move(controlled), priority});
}

}  // namespace sbp
