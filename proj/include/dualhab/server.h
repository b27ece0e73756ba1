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

// Step protocol over TCP: one JSON object per line in each direction,
// strictly request then response. Each connection owns its environments.
// docs/protocol.md describes the messages.

#ifndef DUALHAB_SERVER_H_
#define DUALHAB_SERVER_H_

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dualhab/config_check.h"
#include "dualhab/environment.h"
#include "dualhab/tasks.h"
#include "json.hpp"

namespace dualhab {

inline constexpr int kDefaultPort = 9999;

// DUALHAB_PORT when set and valid, else 9999.
int default_port();

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = kDefaultPort;  // 0 picks a free port
  EngineConfig engine = default_engine_config();
  ContingencyTable table = ContingencyTable::defaults();
  std::filesystem::path scene_dir = default_scene_dir();
  std::optional<Manifest> manifest;
};

// Protocol state of one connection, independent of the transport.
class Session {
 public:
  explicit Session(const ServerConfig& config);

  // Handles one frame (without the newline) and returns the response frame.
  std::string handle_line(const std::string& line);
  nlohmann::json handle(const nlohmann::json& request);

  // Consecutive frames that were not JSON objects.
  int malformed_streak() const { return malformed_streak_; }
  bool shutdown_requested() const { return shutdown_; }
  const Environment* env(const std::string& handle = "default") const;

 private:
  nlohmann::json reset(const nlohmann::json& req, const nlohmann::json& id);
  nlohmann::json step(Environment& env, const nlohmann::json& req, const nlohmann::json& id);
  nlohmann::json solve_ik(const nlohmann::json& req, const nlohmann::json& id);
  nlohmann::json list_tasks(const nlohmann::json& req, const nlohmann::json& id);

  const ServerConfig& config_;
  std::map<std::string, std::unique_ptr<Environment>> envs_;
  int malformed_streak_ = 0;
  bool shutdown_ = false;
};

class Server {
 public:
  explicit Server(ServerConfig config);
  ~Server();

  // Binds and starts accepting in the background. Throws ConfigError.
  void start();
  // Blocks until a client sends shutdown or stop() is called.
  void wait();
  void stop();
  int port() const { return port_; }

 private:
  void accept_loop();
  void serve_connection(int fd);

  ServerConfig config_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<std::thread> workers_;
  std::vector<int> client_fds_;
};

}  // namespace dualhab

#endif  // DUALHAB_SERVER_H_
