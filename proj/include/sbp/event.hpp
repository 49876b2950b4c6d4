#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "sbp/detail/hash.hpp"

namespace sbp {

/// Payload values are restricted to integers and short strings so that the
/// event order and hashing stay well defined.
using Scalar = std::variant<std::int64_t, std::string>;
using Payload = std::map<std::string, Scalar, std::less<>>;

/// A named atomic occurrence with a structured payload. Immutable.
///
/// Events are ordered lexicographically on name, then on the sorted
/// (key, value) payload pairs. Integers sort before strings.
class Event {
 public:
  Event() = default;
  explicit Event(std::string name, Payload payload = {})
      : name_(std::move(name)), payload_(std::move(payload)) {}

  const std::string& name() const noexcept { return name_; }
  const Payload& payload() const noexcept { return payload_; }

  std::optional<std::int64_t> int_field(std::string_view key) const {
    auto it = payload_.find(key);
    if (it == payload_.end()) return std::nullopt;
    if (const auto* v = std::get_if<std::int64_t>(&it->second)) return *v;
    return std::nullopt;
  }

  std::optional<std::string> string_field(std::string_view key) const {
    auto it = payload_.find(key);
    if (it == payload_.end()) return std::nullopt;
    if (const auto* v = std::get_if<std::string>(&it->second)) return *v;
    return std::nullopt;
  }

  /// Compact rendering such as `PlaceYellow(col=3,row=0)`.
  std::string to_string() const {
    std::string out = name_;
    if (payload_.empty()) return out;
    out += '(';
    bool first = true;
    for (const auto& [key, value] : payload_) {
      if (!first) out += ',';
      first = false;
      out += key;
      out += '=';
      if (const auto* i = std::get_if<std::int64_t>(&value)) {
        out += std::to_string(*i);
      } else {
        out += std::get<std::string>(value);
      }
    }
    out += ')';
    return out;
  }

  friend bool operator==(const Event&, const Event&) = default;
  friend auto operator<=>(const Event&, const Event&) = default;

 private:
  std::string name_;
  Payload payload_;
};

}  // namespace sbp

template <>
struct std::hash<sbp::Event> {
  std::size_t operator()(const sbp::Event& e) const noexcept {
    sbp::detail::Hasher h;
    h.add(e.name());
    for (const auto& [key, value] : e.payload()) {
      h.add(key);
      h.add(static_cast<std::uint64_t>(value.index()));
      if (const auto* i = std::get_if<std::int64_t>(&value)) {
        h.add(static_cast<std::uint64_t>(*i));
      } else {
        h.add(std::get<std::string>(value));
      }
    }
    return static_cast<std::size_t>(h.digest());
  }
};

namespace sbp {

/// Dense handle for an event interned in an EventRegistry.
enum class EventId : std::uint32_t {};

constexpr std::uint32_t index(EventId id) noexcept { return static_cast<std::uint32_t>(id); }

/// Interns events so that declarations can work on dense integer ids.
/// Programs register their whole vocabulary at construction time.
class EventRegistry {
 public:
  EventId intern(const Event& e) {
    if (auto it = index_.find(e); it != index_.end()) return it->second;
    const auto id = static_cast<EventId>(events_.size());
    events_.push_back(e);
    index_.emplace(e, id);
    return id;
  }

  std::optional<EventId> find(const Event& e) const {
    if (auto it = index_.find(e); it != index_.end()) return it->second;
    return std::nullopt;
  }

  const Event& event(EventId id) const {
    if (index(id) >= events_.size()) throw std::out_of_range("unknown event id");
    return events_[index(id)];
  }

  std::size_t size() const noexcept { return events_.size(); }

  /// Deterministic total order on events (not on ids).
  bool less(EventId a, EventId b) const { return event(a) < event(b); }

 private:
  std::vector<Event> events_;
  std::unordered_map<Event, EventId> index_;
};

}  // namespace sbp
