#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "connect4/config.hpp"
#include "connect4/match.hpp"
#include "connect4/service.hpp"
#include "oracles.hpp"
#include "sbp/trace_io.hpp"

namespace {

using namespace connect4;
using namespace connect4::service;
using nlohmann::json;
namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("c4sbp-test-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

TEST(Config, AppliesKnownKeysAndRejectsOthers) {
  const auto c = apply_config(json{{"WIN", 21000}, {"center", false}});
  EXPECT_EQ(c.priorities.win, 21000);
  EXPECT_FALSE(c.groups.center);
  EXPECT_TRUE(c.groups.rules);
  EXPECT_THROW(apply_config(json{{"NOPE", 1}}), ConfigError);
  EXPECT_THROW(apply_config(json{{"WIN", "high"}}), ConfigError);
  EXPECT_THROW(apply_config(json{{"center", 1}}), ConfigError);
  EXPECT_THROW(apply_config(json{{"WIN", 19000}}), ConfigError);
  EXPECT_THROW(apply_config(json::array()), ConfigError);
  EXPECT_EQ(apply_config(config_json(c)).priorities, c.priorities);
  EXPECT_EQ(apply_config(config_json(c)).groups, c.groups);

  const auto path = scratch("config.json");
  std::ofstream(path) << R"({"BLOCK_THREAT": 19940})";
  EXPECT_EQ(load_config(path).priorities.block_threat, 19940);
  std::ofstream(path) << "{broken";
  EXPECT_THROW(load_config(path), ConfigError);
  EXPECT_THROW(load_config(scratch("missing.json")), ConfigError);
}

TEST(Config, Geometry) {
  EXPECT_EQ(parse_geometry("6x7").rows, 6);
  const auto g = parse_geometry("4x4x3");
  EXPECT_EQ(g.cols, 4);
  EXPECT_EQ(g.win_length, 3);
  EXPECT_EQ(geometry_string(g), "4x4x3");
  for (const char* bad : {"", "6", "6x", "x7", "6x7x", "9x7", "6x7x9", "axb", "6x7x4x1"}) {
    EXPECT_THROW(parse_geometry(bad), std::invalid_argument) << bad;
  }
}

TEST(Config, BoardJsonRoundTrip) {
  Board b;
  for (int c : {3, 3, 4, 2, 0}) b.drop(b.to_move(), c);
  const auto j = board_json(b);
  EXPECT_EQ(j.at("toMove"), "R");
  EXPECT_EQ(j.at("status"), "playing");
  EXPECT_EQ(j.at("rows").back(), "Y.RYY..");
  EXPECT_EQ(board_from_json(j).row_strings(), b.row_strings());
  EXPECT_THROW(board_from_json(json{{"rows", {"......."}}}), std::invalid_argument);
  auto floating = j;
  floating["rows"][0] = "Y......";
  EXPECT_THROW(board_from_json(floating), std::invalid_argument);
}

TEST(Report, JsonAndStoredTraces) {
  auto report = run_tournament(AgentConfig{}, {random_spec()}, 2, 7);
  const auto dir = scratch("traces");
  store_traces(report, dir);
  const auto j = to_json(report);
  ASSERT_EQ(j.at("games").size(), 2u);
  EXPECT_EQ(j.at("games")[0].at("seed"), 7);
  const auto& s = j.at("summary").at("random");
  EXPECT_EQ(s.at("w").get<int>() + s.at("d").get<int>() + s.at("l").get<int>(), 2);
  for (const auto& g : report.games) {
    std::ifstream in(g.trace_path);
    const std::string text((std::istreambuf_iterator<char>(in)), {});
    const auto t = sbp::parse_jsonl(text);
    EXPECT_EQ(t, g.trace);
    EXPECT_TRUE(sbp::replay(program_for_trace(AgentConfig{}, t), t).ok);
  }
  EXPECT_NE(summary_table(report).find("random"), std::string::npos);
}

/// Plays red into the leftmost open column until the game ends.
json play_out(GameService& svc, const std::string& id) {
  json last;
  for (int guard = 0; guard < 50; ++guard) {
    const auto v = svc.get(id).body;
    if (v.at("status") != "playing") return v;
    const auto b = board_from_json(v.at("board"));
    const auto r = svc.move(id, {{"column", b.open_columns().front()}});
    EXPECT_EQ(r.status, 200) << r.body.dump();
    last = r.body;
  }
  ADD_FAILURE() << "game did not end";
  return last;
}

TEST(Service, CreateOpensInTheCenter) {
  GameService svc({});
  const auto r = svc.create(nullptr);
  ASSERT_EQ(r.status, 201);
  const auto b = board_from_json(r.body.at("board"));
  EXPECT_EQ(b.discs(), 1);
  EXPECT_EQ(b.at(0, 3), Cell::Yellow);
  EXPECT_EQ(r.body.at("status"), "playing");
  EXPECT_TRUE(r.body.at("pendingInput"));
  EXPECT_EQ(r.body.at("agentMove"), (json{{"row", 0}, {"col", 3}}));
  EXPECT_NE(r.body.at("explanation").get<std::string>().find("center@1000"), std::string::npos);
  EXPECT_EQ(r.body.at("gameId").get<std::string>().size(), 16u);
}

TEST(Service, RejectsBadCreateBodies) {
  GameService svc({});
  EXPECT_EQ(svc.create(json{{"bogus", 1}}).status, 400);
  EXPECT_EQ(svc.create(json{{"tieBreak", "coin"}}).status, 400);
  EXPECT_EQ(svc.create(json{{"tieBreak", "random"}, {"seed", -1}}).status, 400);
  EXPECT_EQ(svc.create(json{{"config", {{"WIN", 1}}}}).status, 400);
  EXPECT_EQ(svc.create(json{{"config", {{"rules", false}}}}).status, 400);
  EXPECT_EQ(svc.create(json::array()).status, 400);
  EXPECT_EQ(svc.session_count(), 0u);
  EXPECT_EQ(svc.create(json{{"tieBreak", "random"}, {"seed", 4}}).status, 201);
}

TEST(Service, MoveValidation) {
  GameService svc({});
  const std::string id = svc.create(nullptr).body.at("gameId");
  EXPECT_EQ(svc.move(id, {{"column", 7}}).status, 422);
  EXPECT_EQ(svc.move(id, {{"column", -1}}).status, 422);
  EXPECT_EQ(svc.move(id, {{"column", "3"}}).status, 422);
  EXPECT_EQ(svc.move(id, json::object()).status, 422);
  EXPECT_EQ(svc.move("nope", {{"column", 0}}).status, 404);

  // fill column 3: the agent keeps answering on top
  int full_after = 0;
  while (!board_from_json(svc.get(id).body.at("board")).column_full(3) && full_after < 10) {
    const auto r = svc.move(id, {{"column", 3}});
    ASSERT_EQ(r.status, 200) << r.body.dump();
    if (r.body.at("status") != "playing") GTEST_SKIP() << "game ended before the column filled";
    ++full_after;
  }
  const auto r = svc.move(id, {{"column", 3}});
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.body.at("error"), "column is full");
}

TEST(Service, FinishedGamesAnswerGoneAndBoardMatchesReplay) {
  GameService svc({});
  const std::string id = svc.create(nullptr).body.at("gameId");
  const auto end = play_out(svc, id);
  EXPECT_EQ(end.at("status"), "yellow_won");
  EXPECT_FALSE(end.at("pendingInput"));
  EXPECT_EQ(svc.move(id, {{"column", 0}}).status, 410);

  const auto view = svc.get(id).body;
  EXPECT_EQ(view.at("board").at("status"), "yellow_won");
  EXPECT_EQ(svc.remove(id).status, 204);
  EXPECT_EQ(svc.get(id).status, 404);
  EXPECT_EQ(svc.remove(id).status, 404);
}

TEST(Service, PersistsFinishedGamesOnly) {
  const auto path = scratch("games.jsonl");
  fs::remove(path);
  {
    ServiceOptions o;
    o.persist_path = path;
    GameService svc(o);
    const std::string done = svc.create(nullptr).body.at("gameId");
    play_out(svc, done);
    const std::string open = svc.create(nullptr).body.at("gameId");
    svc.move(open, {{"column", 0}});
  }
  std::ifstream in(path);
  std::string line;
  std::vector<json> lines;
  while (std::getline(in, line)) lines.push_back(json::parse(line));
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0].at("status"), "yellow_won");
  sbp::Trace t;
  for (const auto& e : lines[0].at("trace")) t.events.push_back(sbp::event_from_json(e));
  EXPECT_FALSE(oracle::rules_violation(t));
  EXPECT_TRUE(sbp::replay(program_for_trace(AgentConfig{}, t), t).ok);
}

TEST(Service, IdleSessionsAreEvicted) {
  ServiceOptions o;
  o.ttl = std::chrono::seconds(60);
  GameService svc(o);
  const std::string id = svc.create(nullptr).body.at("gameId");
  svc.evict_idle(Clock::now() + std::chrono::seconds(30));
  EXPECT_EQ(svc.session_count(), 1u);
  svc.evict_idle(Clock::now() + std::chrono::seconds(120));
  EXPECT_EQ(svc.session_count(), 0u);
  EXPECT_EQ(svc.get(id).status, 404);
}

TEST(Service, ConcurrentSessionsStayIndependent) {
  GameService svc({});
  std::vector<std::thread> workers;
  std::vector<std::string> results(4);
  for (std::size_t i = 0; i < results.size(); ++i) {
    workers.emplace_back([&, i] {
      const std::string id = svc.create(nullptr).body.at("gameId");
      results[i] = play_out(svc, id).at("status");
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& r : results) EXPECT_EQ(r, "yellow_won");
  EXPECT_EQ(svc.session_count(), 4u);
}

class Http : public ::testing::Test {
 protected:
  void SetUp() override {
    svc_ = std::make_unique<GameService>(ServiceOptions{});
    svc_->mount(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }
  httplib::Client client() { return httplib::Client("127.0.0.1", port_); }

  std::unique_ptr<GameService> svc_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST_F(Http, GameLifecycle) {
  auto c = client();
  auto created = c.Post("/api/games", "{}", "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  const auto body = json::parse(created->body);
  const std::string id = body.at("gameId");
  EXPECT_EQ(body.at("board").at("rows").back(), "...Y...");

  auto bad = c.Post(("/api/games/" + id + "/moves").c_str(), R"({"column": 7})", "application/json");
  EXPECT_EQ(bad->status, 422);
  auto garbled = c.Post(("/api/games/" + id + "/moves").c_str(), "{", "application/json");
  EXPECT_EQ(garbled->status, 422);
  auto moved = c.Post(("/api/games/" + id + "/moves").c_str(), R"({"column": 0})", "application/json");
  ASSERT_EQ(moved->status, 200);
  const auto after = json::parse(moved->body);
  EXPECT_EQ(board_from_json(after.at("board")).discs(), 3);
  EXPECT_TRUE(after.at("agentMove").is_object());

  auto got = c.Get(("/api/games/" + id).c_str());
  EXPECT_EQ(got->status, 200);
  EXPECT_EQ(json::parse(got->body).at("board"), after.at("board"));
  EXPECT_EQ(c.Get("/api/games/unknown")->status, 404);
  EXPECT_EQ(c.Post("/api/games", "{", "application/json")->status, 400);
  EXPECT_EQ(c.Delete(("/api/games/" + id).c_str())->status, 204);
  EXPECT_EQ(c.Get(("/api/games/" + id).c_str())->status, 404);
}

// ---- CLI -------------------------------------------------------------------

struct Run {
  int code;
  std::string out;
};

Run cli(const std::string& args, const std::string& stdin_text = "") {
  const auto input = scratch("stdin.txt");
  std::ofstream(input) << stdin_text;
  const std::string cmd = std::string(C4SBP_CLI) + " " + args + " < " + input.string() + " 2>&1";
  FILE* p = ::popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (auto n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int status = ::pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

TEST(Cli, PlayAgainstScriptedInput) {
  std::string moves;
  for (int k = 0; k < 30; ++k) moves += std::to_string(k % 7 == 3 ? 0 : k % 7) + "\n";
  const auto r = cli("play", moves);
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("Yellow wins"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("yellow plays column 3"), std::string::npos);

  const auto eof = cli("play", "0\n");
  EXPECT_NE(eof.code, 0);
  const auto junk = cli("play", "x\n9\n");
  EXPECT_NE(junk.out.find("column out of range"), std::string::npos) << junk.out;
}

TEST(Cli, MatchVerifyReplay) {
  const auto dir = scratch("cli-match");
  const auto m = cli("match --opponent random --games 2 --out " + dir.string());
  EXPECT_EQ(m.code, 0) << m.out;
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  const auto report = json::parse(std::ifstream(dir / "report.json"));
  const std::string trace = report.at("games")[0].at("trace");

  const auto r = cli("replay " + trace);
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("\"ok\":true"), std::string::npos) << r.out;

  const auto cx = scratch("cx.jsonl");
  const auto v = cli("--board 4x4x3 verify --property no-illegal-move --branching all --counterexample-out " +
                     cx.string());
  EXPECT_EQ(v.code, 0) << v.out;
  EXPECT_NE(v.out.find("\"verdict\":\"Safe\""), std::string::npos) << v.out;

  const auto bound = cli("verify --max-states 50");
  EXPECT_EQ(bound.code, 2) << bound.out;

  const auto broken = cli("verify --disable block_threats --property red-never-wins --max-states 200000 "
                          "--counterexample-out " + cx.string());
  EXPECT_EQ(broken.code, 1) << broken.out;
  EXPECT_TRUE(sbp::parse_jsonl(std::string(std::istreambuf_iterator<char>(std::ifstream(cx).rdbuf()), {})).size() > 0);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli("").code, 64);
  EXPECT_EQ(cli("match --opponent chess").code, 64);
  EXPECT_EQ(cli("--tie-break sometimes play").code, 64);
  const auto prefix = scratch("prefix.jsonl");
  std::ofstream(prefix) << R"({"name":"PlaceYellow","payload":{"col":3,"row":0}})" << "\n"
                        << R"({"name":"Draw","payload":{}})" << "\n";
  const auto r = cli("verify --prefix-file " + prefix.string());
  EXPECT_EQ(r.code, 64);
  EXPECT_NE(r.out.find("2"), std::string::npos) << r.out;
}

}  // namespace
