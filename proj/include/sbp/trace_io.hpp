#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "sbp/program.hpp"

namespace sbp {

class TraceFormatError : public std::runtime_error {
 public:
  TraceFormatError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline nlohmann::json to_json(const Event& e) {
  nlohmann::json payload = nlohmann::json::object();
  for (const auto& [key, value] : e.payload()) {
    if (const auto* i = std::get_if<std::int64_t>(&value)) {
      payload[key] = *i;
    } else {
      payload[key] = std::get<std::string>(value);
    }
  }
  return {{"name", e.name()}, {"payload", std::move(payload)}};
}

inline Event event_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("name") || !j.at("name").is_string()) {
    throw std::invalid_argument("event needs a string \"name\"");
  }
  Payload payload;
  if (j.contains("payload")) {
    const auto& p = j.at("payload");
    if (!p.is_object()) throw std::invalid_argument("\"payload\" must be an object");
    for (const auto& [key, value] : p.items()) {
      if (value.is_number_integer()) {
        payload.emplace(key, value.get<std::int64_t>());
      } else if (value.is_string()) {
        payload.emplace(key, value.get<std::string>());
      } else {
        throw std::invalid_argument("payload value for '" + key + "' must be an integer or string");
      }
    }
  }
  return Event(j.at("name").get<std::string>(), std::move(payload));
}

/// One compact JSON object per line; payload keys in sorted order.
inline std::string to_jsonl(const Trace& trace) {
  std::string out;
  for (const auto& e : trace.events) {
    out += to_json(e).dump();
    out += '\n';
  }
  return out;
}

/// Blank lines are skipped. Errors carry the 1-based line number.
inline Trace parse_jsonl(std::string_view text) {
  Trace trace;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      trace.events.push_back(event_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& ex) {
      throw TraceFormatError(number, ex.what());
    }
  }
  return trace;
}

}  // namespace sbp
