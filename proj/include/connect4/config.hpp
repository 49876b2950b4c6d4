#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "connect4/agent.hpp"
#include "connect4/board.hpp"

namespace connect4 {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Applies a flat JSON object of constant names (integers) and strategy
/// group names (booleans) onto `base`. Unknown keys are rejected.
inline AgentConfig apply_config(const nlohmann::json& j, AgentConfig base = {}) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    PriorityTable::for_each(base.priorities, [&](std::string_view name, Priority& field) {
      if (name != key) return;
      known = true;
      if (!value.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
      field = value.get<Priority>();
    });
    StrategyGroups::for_each(base.groups, [&](std::string_view name, bool& field) {
      if (name != key) return;
      known = true;
      if (!value.is_boolean()) throw ConfigError("config key '" + key + "' must be true or false");
      field = value.get<bool>();
    });
    if (!known) throw ConfigError("unknown config key '" + key + "'");
  }
  try {
    base.priorities.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return base;
}

inline AgentConfig load_config(const std::filesystem::path& path, AgentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return apply_config(j, std::move(base));
}

inline nlohmann::json config_json(const AgentConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  PriorityTable::for_each(c.priorities, [&](std::string_view name, const Priority& v) { j[std::string(name)] = v; });
  StrategyGroups::for_each(c.groups, [&](std::string_view name, const bool& v) { j[std::string(name)] = v; });
  return j;
}

/// "RxC" or "RxCxL", e.g. "6x7" or "4x4x3". Rejects invalid geometries.
inline Geometry parse_geometry(std::string_view text) {
  const ConfigError bad("board must look like 6x7 or 4x4x3");
  std::vector<int> parts;
  std::size_t pos = 0;
  while (true) {
    const auto end = text.find('x', pos);
    const auto piece = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), v);
    if (piece.empty() || ec != std::errc{} || ptr != piece.data() + piece.size()) throw bad;
    parts.push_back(v);
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  if (parts.size() < 2 || parts.size() > 3) throw bad;
  Geometry g{parts[0], parts[1], parts.size() == 3 ? parts[2] : 4};
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return g;
}

inline std::string geometry_string(const Geometry& g) {
  return std::to_string(g.rows) + "x" + std::to_string(g.cols) + "x" + std::to_string(g.win_length);
}

/// {"rows": [top row first], "toMove": "Y"|"R", "status": ...}
inline nlohmann::json board_json(const Board& b) {
  return {{"rows", b.row_strings()},
          {"toMove", std::string(1, symbol(b.to_move()))},
          {"status", to_string(board_status(b))}};
}

/// Inverse of board_json's "rows"; checks shape, symbols and invariants.
inline Board board_from_json(const nlohmann::json& j, const Geometry& g = {}) {
  if (!j.is_object() || !j.contains("rows") || !j.at("rows").is_array()) {
    throw std::invalid_argument("board needs a \"rows\" array");
  }
  const auto& rows = j.at("rows");
  if (static_cast<int>(rows.size()) != g.rows) throw std::invalid_argument("wrong number of rows");
  Board b(g);
  for (int i = 0; i < g.rows; ++i) {
    const auto& line = rows[static_cast<std::size_t>(i)];
    if (!line.is_string() || static_cast<int>(line.get<std::string>().size()) != g.cols) {
      throw std::invalid_argument("each row must be a string of " + std::to_string(g.cols) + " cells");
    }
    const auto s = line.get<std::string>();
    const int r = g.rows - 1 - i;
    for (int c = 0; c < g.cols; ++c) {
      switch (s[static_cast<std::size_t>(c)]) {
        case '.': break;
        case 'Y': b.set({r, c}, Cell::Yellow); break;
        case 'R': b.set({r, c}, Cell::Red); break;
        default: throw std::invalid_argument("cells must be '.', 'Y' or 'R'");
      }
    }
  }
  if (!b.well_formed()) throw std::invalid_argument("board violates gravity or disc balance");
  return b;
}

}  // namespace connect4
