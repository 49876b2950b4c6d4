#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "connect4/agent.hpp"
#include "connect4/config.hpp"
#include "connect4/match.hpp"
#include "sbp/engine.hpp"
#include "sbp/trace_io.hpp"

namespace connect4::service {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct ServiceOptions {
  AgentConfig config{};
  /// Idle sessions older than this are evicted.
  std::chrono::seconds ttl{3600};
  /// Finished games are appended here as JSON lines when set.
  std::optional<std::filesystem::path> persist_path;
  std::optional<std::filesystem::path> static_dir;
};

struct Reply {
  int status = 200;
  json body = json::object();
};

inline Reply error_reply(int status, std::string message) { return {status, {{"error", std::move(message)}}}; }

/// One game: an engine running on its own worker thread, suspended inside
/// the red player's input provider between moves. All fields below the
/// mutex are guarded by it.
class Session {
 public:
  Session(std::string id, const AgentConfig& config) : id_(std::move(id)), geometry_(config.geometry) {
    auto provider = std::make_shared<Provider>(*this);
    program_.emplace(build_agent_program(config, InteractiveRed{provider}));
    touched_ = Clock::now();
    created_ = updated_ = std::chrono::system_clock::now();
  }

  ~Session() { stop(); }

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const noexcept { return id_; }

  /// Starts the engine and waits for the agent's first move.
  void start(std::function<void(const Session&)> on_finish) {
    on_finish_ = std::move(on_finish);
    std::unique_lock lock(m_);
    worker_ = std::thread([this] { work(); });
    cv_.wait(lock, [&] { return awaiting_ || finished_; });
  }

  /// Closes the input mailbox and joins the worker.
  void stop() {
    {
      std::lock_guard lock(m_);
      closed_ = true;
    }
    cv_.notify_all();
    if (worker_.joinable()) worker_.join();
  }

  Reply view() {
    std::lock_guard lock(m_);
    touched_ = Clock::now();
    json body = snapshot_locked();
    if (last_agent_move_) {
      body["lastAgentMove"] = move_json(*last_agent_move_);
      body["explanation"] = explanation_;
    }
    return {200, std::move(body)};
  }

  Reply move(const json& request) {
    std::unique_lock lock(m_);
    touched_ = Clock::now();
    if (finished_ || status_locked() != GameStatus::Playing) return error_reply(410, "game is finished");
    if (!request.is_object() || !request.contains("column") || !request.at("column").is_number_integer()) {
      return error_reply(422, "body must be {\"column\": integer}");
    }
    const auto col = request.at("column").get<std::int64_t>();
    if (col < 0 || col >= geometry_.cols) {
      return error_reply(422, fmt::format("column must be in 0..{}", geometry_.cols - 1));
    }
    const Board board = board_locked();
    if (!board.lowest_empty_row(static_cast<int>(col))) return error_reply(409, "column is full");
    if (!awaiting_) return error_reply(409, "not red's turn");

    const auto prompts = prompts_;
    const auto agent_moves = agent_moves_;
    column_ = static_cast<int>(col);
    cv_.notify_all();
    cv_.wait(lock, [&] { return finished_ || (awaiting_ && prompts_ > prompts); });

    json body = snapshot_locked();
    if (agent_moves_ > agent_moves && last_agent_move_) {
      body["agentMove"] = move_json(*last_agent_move_);
      body["explanation"] = explanation_;
    } else {
      body["agentMove"] = nullptr;
      body["explanation"] = nullptr;
    }
    return {200, std::move(body)};
  }

  /// Reply body for game creation.
  Reply created() {
    std::lock_guard lock(m_);
    json body = snapshot_locked();
    body["agentMove"] = last_agent_move_ ? move_json(*last_agent_move_) : json(nullptr);
    body["explanation"] = last_agent_move_ ? json(explanation_) : json(nullptr);
    return {201, std::move(body)};
  }

  Clock::time_point touched() const {
    std::lock_guard lock(m_);
    return touched_;
  }

  sbp::Trace trace() const {
    std::lock_guard lock(m_);
    return log_;
  }

  std::string status_name() const {
    std::lock_guard lock(m_);
    return to_string(status_locked());
  }

  /// True for a finished game that ended on the board, not by closing.
  bool completed() const {
    std::lock_guard lock(m_);
    return ran_ && !closed_ && !fault_;
  }

 private:
  class Provider final : public InputProvider {
   public:
    explicit Provider(Session& s) : s_(s) {}
    std::optional<int> next_column(const Board&) override {
      std::unique_lock lock(s_.m_);
      s_.awaiting_ = true;
      ++s_.prompts_;
      s_.cv_.notify_all();
      s_.cv_.wait(lock, [&] { return s_.column_.has_value() || s_.closed_; });
      s_.awaiting_ = false;
      if (s_.closed_) return std::nullopt;
      const int c = *s_.column_;
      s_.column_.reset();
      return c;
    }

   private:
    Session& s_;
  };

  void work() {
    sbp::RunOptions opts;
    opts.on_step = [this](std::size_t, const sbp::SelectionOutcome& outcome) {
      std::lock_guard lock(m_);
      log_.events.push_back(*outcome.selected);
      updated_ = std::chrono::system_clock::now();
      if (auto p = decode_placement(*outcome.selected); p && p->color == Color::Yellow) {
        last_agent_move_ = p->pos;
        explanation_ = outcome.explanation;
        ++agent_moves_;
      }
    };
    try {
      sbp::run(*program_, opts);
    } catch (const std::exception& e) {
      spdlog::error("session {}: {}", id_, e.what());
      std::lock_guard lock(m_);
      fault_ = e.what();
    }
    {
      std::lock_guard lock(m_);
      ran_ = true;
    }
    if (on_finish_) on_finish_(*this);
    {
      std::lock_guard lock(m_);
      finished_ = true;
    }
    cv_.notify_all();
  }

  static std::int64_t epoch_ms(std::chrono::system_clock::time_point t) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
  }

  static json move_json(Position p) { return {{"row", p.row}, {"col", p.col}}; }

  Board board_locked() const { return board_after(log_, geometry_); }

  GameStatus status_locked() const {
    switch (trace_result(log_)) {
      case MatchResult::YellowWin: return GameStatus::YellowWon;
      case MatchResult::RedWin: return GameStatus::RedWon;
      case MatchResult::Draw: return GameStatus::Draw;
      case MatchResult::Unfinished: break;
    }
    return GameStatus::Playing;
  }

  json snapshot_locked() const {
    json board = board_json(board_locked());
    board["status"] = to_string(status_locked());
    return {{"gameId", id_},
            {"board", board},
            {"status", to_string(status_locked())},
            {"pendingInput", awaiting_ && !finished_},
            {"createdAt", epoch_ms(created_)},
            {"updatedAt", epoch_ms(updated_)}};
  }

  const std::string id_;
  const Geometry geometry_;
  std::optional<Program> program_;
  std::function<void(const Session&)> on_finish_;
  std::thread worker_;

  mutable std::mutex m_;
  std::condition_variable cv_;
  sbp::Trace log_;
  std::optional<Position> last_agent_move_;
  std::string explanation_;
  std::size_t agent_moves_ = 0;
  std::size_t prompts_ = 0;
  bool awaiting_ = false;
  bool ran_ = false;
  bool finished_ = false;
  bool closed_ = false;
  std::optional<int> column_;
  std::optional<std::string> fault_;
  Clock::time_point touched_;
  std::chrono::system_clock::time_point created_, updated_;
};

/// Session registry plus the REST handlers.
class GameService {
 public:
  explicit GameService(ServiceOptions options) : options_(std::move(options)), rng_(std::random_device{}()) {}

  ~GameService() {
    std::map<std::string, std::shared_ptr<Session>> doomed;
    {
      std::lock_guard lock(m_);
      doomed.swap(sessions_);
    }
    for (auto& [id, s] : doomed) s->stop();
  }

  Reply create(const json& request) {
    evict_idle();
    AgentConfig config = options_.config;
    if (!request.is_null() && !request.is_object()) return error_reply(400, "body must be a JSON object");
    try {
      if (request.is_object()) {
        for (const auto& [key, value] : request.items()) {
          if (key != "tieBreak" && key != "seed" && key != "config") {
            return error_reply(400, "unknown field '" + key + "'");
          }
        }
        if (request.contains("config")) config = apply_config(request.at("config"), config);
        if (request.contains("tieBreak")) {
          const auto& tb = request.at("tieBreak");
          if (!tb.is_string()) return error_reply(400, "tieBreak must be a string");
          std::uint64_t seed = 0;
          if (request.contains("seed")) {
            const auto& sj = request.at("seed");
            if (!sj.is_number_integer() || (!sj.is_number_unsigned() && sj.get<std::int64_t>() < 0)) {
              return error_reply(400, "seed must be a nonnegative integer");
            }
            seed = request.at("seed").get<std::uint64_t>();
          }
          if (tb == "event-order") {
            config.tie_break = sbp::EventOrder{};
          } else if (tb == "random") {
            config.tie_break = sbp::SeededRandom{seed};
          } else {
            return error_reply(400, "tieBreak must be \"event-order\" or \"random\"");
          }
        }
      }
    } catch (const std::invalid_argument& e) {
      return error_reply(400, e.what());
    }

    std::shared_ptr<Session> session;
    try {
      session = std::make_shared<Session>(new_id(), config);
    } catch (const std::invalid_argument& e) {
      return error_reply(400, e.what());
    }
    {
      std::lock_guard lock(m_);
      sessions_[session->id()] = session;
    }
    session->start([this](const Session& s) { persist(s); });
    spdlog::info("session {} created", session->id());
    return session->created();
  }

  Reply get(const std::string& id) {
    evict_idle();
    auto s = find(id);
    return s ? s->view() : error_reply(404, "no such game");
  }

  Reply move(const std::string& id, const json& request) {
    evict_idle();
    auto s = find(id);
    return s ? s->move(request) : error_reply(404, "no such game");
  }

  Reply remove(const std::string& id) {
    std::shared_ptr<Session> s;
    {
      std::lock_guard lock(m_);
      auto it = sessions_.find(id);
      if (it == sessions_.end()) return error_reply(404, "no such game");
      s = it->second;
      sessions_.erase(it);
    }
    s->stop();
    return {204, nullptr};
  }

  std::size_t session_count() const {
    std::lock_guard lock(m_);
    return sessions_.size();
  }

  /// Drops sessions idle for longer than the TTL.
  void evict_idle(Clock::time_point now = Clock::now()) {
    std::vector<std::shared_ptr<Session>> doomed;
    {
      std::lock_guard lock(m_);
      for (auto it = sessions_.begin(); it != sessions_.end();) {
        if (now - it->second->touched() > options_.ttl) {
          doomed.push_back(it->second);
          it = sessions_.erase(it);
        } else {
          ++it;
        }
      }
    }
    for (auto& s : doomed) {
      spdlog::info("session {} evicted", s->id());
      s->stop();
    }
  }

  void mount(httplib::Server& server) {
    auto send = [](httplib::Response& res, const Reply& r) {
      res.status = r.status;
      if (r.status != 204) res.set_content(r.body.dump(), "application/json");
    };
    auto parse = [](const httplib::Request& req) -> std::optional<json> {
      if (req.body.empty()) return json(nullptr);
      try {
        return json::parse(req.body);
      } catch (const json::parse_error&) {
        return std::nullopt;
      }
    };
    server.Post("/api/games", [=, this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse(req);
      send(res, body ? create(*body) : error_reply(400, "malformed JSON"));
    });
    server.Get(R"(/api/games/([^/]+))", [=, this](const httplib::Request& req, httplib::Response& res) {
      send(res, get(req.matches[1]));
    });
    server.Post(R"(/api/games/([^/]+)/moves)", [=, this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse(req);
      send(res, body ? move(req.matches[1], *body) : error_reply(422, "malformed JSON"));
    });
    server.Delete(R"(/api/games/([^/]+))", [=, this](const httplib::Request& req, httplib::Response& res) {
      send(res, remove(req.matches[1]));
    });
    if (options_.static_dir) server.set_mount_point("/", options_.static_dir->string());
  }

 private:
  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard lock(m_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  std::string new_id() {
    std::lock_guard lock(m_);
    return fmt::format("{:016x}", rng_());
  }

  void persist(const Session& s) {
    if (!options_.persist_path || !s.completed()) return;
    json trace = json::array();
    for (const auto& e : s.trace().events) trace.push_back(sbp::to_json(e));
    const json line{{"gameId", s.id()}, {"status", s.status_name()}, {"trace", std::move(trace)}};
    std::lock_guard lock(persist_m_);
    std::ofstream(*options_.persist_path, std::ios::app) << line.dump() << '\n';
  }

  ServiceOptions options_;
  mutable std::mutex m_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mt19937_64 rng_;
  std::mutex persist_m_;
};

}  // namespace connect4::service
