#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "sbp/event.hpp"
#include "sbp/selection.hpp"
#include "sbp/thread.hpp"

namespace sbp {

/// An ordered set of scenario threads over a shared event vocabulary.
class Program {
 public:
  Program(std::shared_ptr<const EventRegistry> registry, std::vector<ScenarioThread> threads,
          TieBreak tie_break = EventOrder{})
      : registry_(std::move(registry)), threads_(std::move(threads)), tie_break_(tie_break) {
    if (!registry_) throw std::invalid_argument("program needs an event registry");
    std::unordered_set<std::string> names;
    for (const auto& t : threads_) {
      if (!names.insert(t.name()).second) {
        throw std::invalid_argument("duplicate thread name: " + t.name());
      }
    }
  }

  const EventRegistry& registry() const noexcept { return *registry_; }
  const std::shared_ptr<const EventRegistry>& shared_registry() const noexcept { return registry_; }
  const std::vector<ScenarioThread>& threads() const noexcept { return threads_; }
  const TieBreak& tie_break() const noexcept { return tie_break_; }

  Program with_tie_break(TieBreak tie_break) const {
    Program copy = *this;
    copy.tie_break_ = tie_break;
    return copy;
  }

 private:
  std::shared_ptr<const EventRegistry> registry_;
  std::vector<ScenarioThread> threads_;
  TieBreak tie_break_;
};

/// Ordered list of selected events.
struct Trace {
  std::vector<Event> events;

  std::size_t size() const noexcept { return events.size(); }
  bool empty() const noexcept { return events.empty(); }
  friend bool operator==(const Trace&, const Trace&) = default;
};

}  // namespace sbp
