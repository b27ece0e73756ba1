// Copyright 2026 The Dualhab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dualhab/server.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <random>

#include <gtest/gtest.h>

#include "dualhab/actions.h"
#include "support/random_commands.h"
#include "support/test_paths.h"

namespace dualhab {
namespace {

using nlohmann::json;

ServerConfig test_config() {
  ServerConfig c;
  c.scene_dir = testing::repo_data_dir() / "scenes";
  c.port = 0;
  return c;
}

std::string error_code(const json& r) {
  const std::string msg = r.at("errorMessage").get<std::string>();
  return msg.substr(0, msg.find(':'));
}

class SessionTest : public ::testing::Test {
 protected:
  json send(const json& req) { return json::parse(session_.handle_line(req.dump())); }
  json reset(const std::string& extra = "{}") {
    json req = {{"id", 1}, {"command", "reset"}, {"scene", "kitchen_01"}, {"seed", 7}};
    req.update(json::parse(extra));
    return send(req);
  }

  ServerConfig config_ = test_config();
  Session session_{config_};
};

TEST_F(SessionTest, ResetReturnsInitialState) {
  json r = reset(R"({"task_id": "pick_cup"})");
  EXPECT_EQ(r.at("id"), 1);
  EXPECT_TRUE(r.at("success"));
  EXPECT_EQ(r.at("stepCount"), 0);
  EXPECT_EQ(r.at("taskStatus"), "InProgress");
  EXPECT_EQ(r.at("feedback").at("step_count"), 0);
  EXPECT_EQ(r.at("feedback").at("objects").size(), session_.env()->world().objects.size());
  for (const char* key : {"id", "success", "outcome", "errorMessage", "feedback", "collisions",
                          "taskStatus", "stepCount"}) {
    EXPECT_TRUE(r.contains(key)) << key;
  }
}

TEST_F(SessionTest, SeedAcceptsAnyNonNegativeInteger) {
  json req = {{"id", 1}, {"command", "reset"}, {"scene", "kitchen_01"}};
  req["seed"] = static_cast<std::int64_t>(5);
  EXPECT_TRUE(session_.handle(req).at("success"));
  EXPECT_EQ(session_.env()->world().rng.seed(), 5u);
  req["seed"] = -1;
  EXPECT_EQ(error_code(session_.handle(req)), "E_PARSE");
  req["seed"] = 1.5;
  EXPECT_EQ(error_code(session_.handle(req)), "E_PARSE");
}

TEST_F(SessionTest, StepForms) {
  reset();
  json a = send({{"id", "a"}, {"command", "step"}, {"action", "(RotateLeft, Magnitude=1)"}});
  EXPECT_EQ(a.at("id"), "a");
  EXPECT_TRUE(a.at("success"));
  EXPECT_EQ(a.at("stepCount"), 1);
  json b = send({{"id", 2}, {"command", "(RotateRight, Magnitude=1)"}});
  EXPECT_EQ(b.at("stepCount"), 2);
  json c = send({{"id", 3}, {"command", {{"action", "Crouch"}}}});
  EXPECT_EQ(c.at("stepCount"), 3);
  EXPECT_EQ(session_.env()->world().robot.posture, Posture::kCrouch);
}

TEST_F(SessionTest, ParallelOutcomeJoinsArms) {
  reset(R"({"difficulty": "medium"})");
  Environment lib(testing::bundled_scene("kitchen_01"),
                  make_env_config(default_engine_config(), RobotProfile::kX1,
                                  DifficultyLevel::medium()),
                  7);
  const WorldState& w = lib.world();
  const std::string first = w.objects.begin()->first;
  const std::string last = w.objects.rbegin()->first;
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"(pick, arm=left, objectID=" + first + ")", "(pick, arm=right, objectID=" + first + ")"},
      {"(pick, arm=left, objectID=" + first + ")", "(pick, arm=right, objectID=" + last + ")"},
      {"(Crouch)", "(pick, arm=right, objectID=" + last + ")"}};
  for (const auto& [l, r] : pairs) {
    json resp = send({{"id", 4}, {"command", "parallel"}, {"parallel", {l, r}}});
    auto [lr, rr] = lib.step_parallel(parse_command(l), parse_command(r));
    EXPECT_EQ(resp.at("outcome"), lr.outcome + "|" + rr.outcome);
    EXPECT_EQ(resp.at("success"), lr.success && rr.success);
    EXPECT_EQ(resp.at("stepCount"), lib.world().step_count);
  }
  EXPECT_EQ(serialize(session_.env()->world()), serialize(lib.world()));
}

TEST_F(SessionTest, UndoOnEmptyHistory) {
  reset();
  json r = send({{"id", 5}, {"command", "undo"}});
  EXPECT_FALSE(r.at("success"));
  EXPECT_EQ(error_code(r), "E_PRECONDITION");
  EXPECT_NE(r.at("errorMessage").get<std::string>().find("NothingToUndo"), std::string::npos);
}

TEST_F(SessionTest, UndoRedoAndDump) {
  reset();
  send({{"id", 1}, {"command", "(RotateLeft, Magnitude=1)"}});
  json u = send({{"id", 2}, {"command", "undo"}});
  EXPECT_TRUE(u.at("success"));
  EXPECT_EQ(u.at("stepCount"), 0);
  json re = send({{"id", 3}, {"command", "redo"}});
  EXPECT_EQ(re.at("stepCount"), 1);
  json d = send({{"id", 4}, {"command", "dumphistory"}});
  EXPECT_EQ(d.at("feedback").at("snapshots").size(), 2u);
  json l = send({{"id", 5}, {"command", "loadstate"}});
  EXPECT_EQ(l.at("stepCount"), 1);
  EXPECT_EQ(l.at("feedback"), load_state(session_.env()->world()));
}

TEST_F(SessionTest, SolveIk) {
  json ok = send({{"id", 1},
                  {"command", "solveik"},
                  {"robot", "x1"},
                  {"target", {{"rotation", {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}},
                              {"translation", {0.9, 0.0, 0.0}}}}});
  ASSERT_TRUE(ok.at("success")) << ok.dump();
  EXPECT_LT(ok.at("feedback").at("position_error").get<double>(), 1e-3);
  json far = send({{"id", 2},
                   {"command", "solveik"},
                   {"target", {{"rotation", {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}},
                               {"translation", {3.0, 0.0, 0.0}}}}});
  EXPECT_FALSE(far.at("success"));
  EXPECT_EQ(error_code(far), "E_IK_UNREACHABLE");
}

TEST_F(SessionTest, ErrorCodes) {
  EXPECT_EQ(error_code(send({{"id", 1}, {"command", "undo"}})), "E_UNKNOWN_ENV");
  EXPECT_EQ(error_code(send({{"id", 1}, {"command", "reset"}, {"scene", "attic_9"}})),
            "E_UNKNOWN_ENV");
  reset();
  EXPECT_EQ(error_code(send({{"id", 1}, {"command", "dance"}})), "E_UNKNOWN_CMD");
  EXPECT_EQ(error_code(send({{"id", 1}, {"command", "step"}, {"action", "(Pick, arm=left"}})),
            "E_PARSE");
  EXPECT_EQ(error_code(send({{"id", 1}, {"command", "undo"}, {"env", "other"}})),
            "E_UNKNOWN_ENV");
}

TEST_F(SessionTest, MalformedFrames) {
  json r = json::parse(session_.handle_line("{oops"));
  EXPECT_TRUE(r.at("id").is_null());
  EXPECT_EQ(error_code(r), "E_PARSE");
  session_.handle_line("[1, 2]");
  EXPECT_EQ(session_.malformed_streak(), 2);
  reset();
  EXPECT_EQ(session_.malformed_streak(), 0);
}

TEST_F(SessionTest, SeparateEnvironments) {
  reset();
  reset(R"({"env": "b", "scene": "bathroom_01"})");
  send({{"id", 1}, {"command", "(RotateLeft, Magnitude=1)"}, {"env", "b"}});
  EXPECT_EQ(session_.env("b")->world().step_count, 1u);
  EXPECT_EQ(session_.env()->world().step_count, 0u);
  json list = send({{"id", 2}, {"command", "listtasks"}, {"env", "b"}});
  EXPECT_EQ(list.at("feedback").at("scene_id"), "bathroom_01");
  EXPECT_FALSE(list.at("feedback").at("tasks").empty());
}

// The protocol is a thin layer: the same commands through a Session and
// through the library land on the same bytes.
TEST_F(SessionTest, MatchesLibrary) {
  std::mt19937_64 gen(5);
  for (int seq = 0; seq < 10; ++seq) {
    reset(R"({"difficulty": "hard", "robot": "h1", "seed": )" + std::to_string(seq) + "}");
    Environment lib(testing::bundled_scene("kitchen_01"),
                    make_env_config(default_engine_config(), RobotProfile::kH1,
                                    DifficultyLevel::hard()),
                    seq);
    for (int i = 0; i < 25; ++i) {
      ActionCommand cmd = testing::random_command(lib.world(), gen);
      json r = send({{"id", i}, {"command", "step"}, {"action", to_text(cmd)}});
      StepResult res = lib.step(cmd);
      ASSERT_EQ(r.at("outcome"), res.outcome) << to_text(cmd);
    }
    EXPECT_EQ(serialize(session_.env()->world()), serialize(lib.world()));
  }
}

class Client {
 public:
  explicit Client(int port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    connected_ = ::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0;
  }
  ~Client() { ::close(fd_); }

  bool connected() const { return connected_; }
  void send_line(const std::string& line) {
    std::string frame = line + "\n";
    ::send(fd_, frame.data(), frame.size(), MSG_NOSIGNAL);
  }
  // Empty when the server closed the connection.
  std::string read_line() {
    while (true) {
      auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      char chunk[4096];
      ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
      if (n <= 0) return "";
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }
  json call(const json& req) {
    send_line(req.dump());
    return json::parse(read_line());
  }

 private:
  int fd_ = -1;
  bool connected_ = false;
  std::string buffer_;
};

TEST(ServerTest, TcpRoundTrip) {
  Server server(test_config());
  server.start();
  ASSERT_GT(server.port(), 0);
  Client client(server.port());
  ASSERT_TRUE(client.connected());
  json r = client.call({{"id", 1}, {"command", "reset"}, {"scene", "kitchen_01"}});
  EXPECT_TRUE(r.at("success"));
  r = client.call({{"id", 2}, {"command", "(MoveAhead, Magnitude=1)"}});
  EXPECT_EQ(r.at("id"), 2);
  EXPECT_EQ(r.at("stepCount"), 1);
  r = client.call({{"id", 3}, {"command", "shutdown"}});
  EXPECT_TRUE(r.at("success"));
  server.wait();
}

TEST(ServerTest, ThreeMalformedFramesClose) {
  Server server(test_config());
  server.start();
  Client client(server.port());
  ASSERT_TRUE(client.connected());
  for (int i = 0; i < 3; ++i) {
    client.send_line("not json");
    json r = json::parse(client.read_line());
    EXPECT_EQ(error_code(r), "E_PARSE");
  }
  EXPECT_EQ(client.read_line(), "");
  server.stop();
}

TEST(ServerTest, ConnectionsAreIndependent) {
  Server server(test_config());
  server.start();
  Client a(server.port());
  Client b(server.port());
  a.call({{"id", 1}, {"command", "reset"}, {"scene", "kitchen_01"}});
  json r = b.call({{"id", 1}, {"command", "undo"}});
  EXPECT_EQ(error_code(r), "E_UNKNOWN_ENV");
  server.stop();
}

}  // namespace
}  // namespace dualhab
