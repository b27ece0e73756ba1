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

#include <cerrno>
#include <cstdlib>
#include <cstring>

#include "dualhab/actions.h"
#include "dualhab/error.h"
#include "dualhab/kinematics.h"

namespace dualhab {
namespace {

using json = nlohmann::json;

constexpr int kMaxMalformed = 3;
constexpr std::size_t kMaxFrameBytes = 1 << 20;

json base_response(const json& id) {
  return {{"id", id},
          {"success", false},
          {"outcome", "error"},
          {"errorMessage", nullptr},
          {"feedback", nullptr},
          {"collisions", json::array()},
          {"taskStatus", nullptr},
          {"stepCount", nullptr}};
}

json error_response(const json& id, const std::string& code, const std::string& message) {
  json r = base_response(id);
  r["errorMessage"] = code + ": " + message;
  return r;
}

void attach_env(json& r, const Environment& env) {
  r["stepCount"] = env.world().step_count;
  if (auto status = env.task_status()) r["taskStatus"] = std::string(to_string(*status));
}

json collisions_json(const StepResult& res) {
  json c = json::array();
  for (const auto& [a, b] : res.collisions) c.push_back(json::array({a, b}));
  return c;
}

// Engine step result as a wire response.
json step_response(const json& id, const StepResult& res, const Environment& env) {
  json r = base_response(id);
  r["success"] = res.success;
  r["outcome"] = res.outcome;
  r["feedback"] = res.feedback;
  r["collisions"] = collisions_json(res);
  if (!res.violations.empty()) {
    const bool ik = res.violations.front().code == "ik_unreachable";
    r["errorMessage"] = std::string(ik ? "E_IK_UNREACHABLE" : "E_PRECONDITION") + ": " +
                        res.error_message.value_or(res.violations.front().detail);
  } else if (res.error_message) {
    r["errorMessage"] = *res.error_message;
  }
  attach_env(r, env);
  return r;
}

std::string get_string(const json& req, const char* key, const std::string& fallback) {
  if (!req.contains(key) || req.at(key).is_null()) return fallback;
  if (!req.at(key).is_string()) throw ParseError(std::string("'") + key + "' must be a string");
  return req.at(key).get<std::string>();
}

Eigen::Matrix4d matrix_from_json(const json& j) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  if (j.is_array() && j.size() == 4) {
    for (int r = 0; r < 4; ++r) {
      if (!j[r].is_array() || j[r].size() != 4) throw ParseError("target must be 4x4");
      for (int c = 0; c < 4; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
  }
  if (j.is_object() && j.contains("rotation") && j.contains("translation")) {
    const json& rot = j.at("rotation");
    const json& t = j.at("translation");
    if (!rot.is_array() || rot.size() != 3 || !t.is_array() || t.size() != 3) {
      throw ParseError("target needs a 3x3 rotation and a 3-vector translation");
    }
    for (int r = 0; r < 3; ++r) {
      if (!rot[r].is_array() || rot[r].size() != 3) throw ParseError("rotation must be 3x3");
      for (int c = 0; c < 3; ++c) m(r, c) = rot[r][c].get<double>();
      m(r, 3) = t[r].get<double>();
    }
    return m;
  }
  throw ParseError("target must be a 4x4 matrix or {rotation, translation}");
}

}  // namespace

int default_port() {
  if (const char* env = std::getenv("DUALHAB_PORT"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    long p = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && p > 0 && p < 65536) return static_cast<int>(p);
  }
  return kDefaultPort;
}

// ---------------------------------------------------------------------------

Session::Session(const ServerConfig& config) : config_(config) {}

const Environment* Session::env(const std::string& handle) const {
  auto it = envs_.find(handle);
  return it == envs_.end() ? nullptr : it->second.get();
}

std::string Session::handle_line(const std::string& line) {
  json req;
  try {
    req = json::parse(line);
  } catch (const json::parse_error&) {
  }
  if (!req.is_object()) {
    ++malformed_streak_;
    return error_response(nullptr, "E_PARSE", "frame is not a JSON object").dump();
  }
  malformed_streak_ = 0;
  return handle(req).dump();
}

json Session::handle(const json& req) {
  const json id = req.contains("id") ? req.at("id") : json(nullptr);
  try {
    if (!req.contains("command")) return error_response(id, "E_PARSE", "missing 'command'");
    const json& command = req.at("command");
    const std::string handle = get_string(req, "env", "default");

    std::string name;
    if (command.is_string()) {
      name = to_lower(command.get<std::string>());
    } else if (!command.is_object()) {
      return error_response(id, "E_PARSE", "'command' must be a string or an object");
    }
    if (name == "reset") return reset(req, id);
    if (name == "solveik") return solve_ik(req, id);
    if (name == "listtasks") return list_tasks(req, id);
    if (name == "shutdown") {
      shutdown_ = true;
      json r = base_response(id);
      r["success"] = true;
      r["outcome"] = "ok";
      return r;
    }

    const bool known = name == "step" || name == "parallel" || name == "undo" ||
                       name == "redo" || name == "loadstate" || name == "dumphistory" ||
                       command.is_object() || req.contains("parallel") ||
                       (!name.empty() && name.front() == '(');
    if (!known) {
      // Bare action text such as "pick, arm=left, objectID=..." still counts.
      try {
        parse_command(std::string_view(command.get<std::string>()));
      } catch (const ParseError&) {
        return error_response(id, "E_UNKNOWN_CMD", "unknown command '" + command.get<std::string>() + "'");
      }
    }

    auto it = envs_.find(handle);
    if (it == envs_.end()) {
      return error_response(id, "E_UNKNOWN_ENV", "no environment '" + handle + "'; send reset first");
    }
    Environment& env = *it->second;

    if (name == "undo" || name == "redo" || name == "loadstate") {
      StepResult res = name == "undo" ? env.undo() : name == "redo" ? env.redo() : env.load_state();
      return step_response(id, res, env);
    }
    if (name == "dumphistory") {
      json r = base_response(id);
      r["success"] = true;
      r["outcome"] = "ok";
      r["feedback"] = env.history().dump();
      attach_env(r, env);
      return r;
    }
    return step(env, req, id);
  } catch (const ParseError& e) {
    return error_response(id, "E_PARSE", e.what());
  } catch (const json::exception& e) {
    return error_response(id, "E_PARSE", e.what());
  } catch (const Error& e) {
    return error_response(id, "E_PRECONDITION", e.kind() + ": " + e.what());
  }
}

json Session::reset(const json& req, const json& id) {
  const std::string handle = get_string(req, "env", "default");
  const std::string scene_name = get_string(req, "scene", "");
  if (scene_name.empty()) return error_response(id, "E_PARSE", "reset needs 'scene'");
  auto robot = parse_profile(get_string(req, "robot", "x1"));
  if (!robot) return error_response(id, "E_PARSE", "unknown robot");
  auto difficulty = parse_difficulty(get_string(req, "difficulty", "easy"));
  if (!difficulty) return error_response(id, "E_PARSE", "unknown difficulty");
  std::uint64_t seed = 0;
  if (req.contains("seed") && !req.at("seed").is_null()) {
    const json& s = req.at("seed");
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      return error_response(id, "E_PARSE", "'seed' must be a non-negative integer");
    }
    seed = req.at("seed").get<std::uint64_t>();
  }

  SceneSpec scene;
  try {
    scene = resolve_scene(scene_name, config_.scene_dir);
  } catch (const UnknownEntity& e) {
    return error_response(id, "E_UNKNOWN_ENV", e.what());
  }
  std::optional<TaskInstance> task;
  const std::string selector = get_string(req, "task_id", "");
  if (!selector.empty()) {
    WorldState initial = load_scene(scene);
    try {
      task = select_task(initial, selector, config_.manifest ? &*config_.manifest : nullptr);
    } catch (const UnknownEntity& e) {
      return error_response(id, "E_PARSE", e.what());
    }
  }
  EnvConfig env_config = make_env_config(config_.engine, *robot, *difficulty, config_.table);
  auto env = std::make_unique<Environment>(scene, env_config, seed, task);
  json r = base_response(id);
  r["success"] = true;
  r["outcome"] = "ok";
  r["feedback"] = load_state(env->world());
  attach_env(r, *env);
  envs_[handle] = std::move(env);
  return r;
}

json Session::step(Environment& env, const json& req, const json& id) {
  if (req.contains("parallel")) {
    const json& pair = req.at("parallel");
    if (!pair.is_array() || pair.size() != 2) {
      return error_response(id, "E_PARSE", "'parallel' must be [left, right]");
    }
    auto parse = [](const json& j) {
      return j.is_string() ? parse_command(std::string_view(j.get<std::string>())) : parse_command(j);
    };
    ActionCommand left = parse(pair[0]);
    ActionCommand right = parse(pair[1]);
    auto [lr, rr] = env.step_parallel(left, right);
    json r = step_response(id, lr, env);
    r["success"] = lr.success && rr.success;
    r["outcome"] = lr.outcome + "|" + rr.outcome;
    json collisions = collisions_json(lr);
    for (auto& c : collisions_json(rr)) collisions.push_back(c);
    r["collisions"] = collisions;
    json right_error = step_response(id, rr, env)["errorMessage"];
    if (!right_error.is_null()) {
      r["errorMessage"] = r["errorMessage"].is_null()
                              ? "right: " + right_error.get<std::string>()
                              : r["errorMessage"].get<std::string>() + " | right: " +
                                    right_error.get<std::string>();
    } else if (!r["errorMessage"].is_null()) {
      r["errorMessage"] = "left: " + r["errorMessage"].get<std::string>();
    }
    return r;
  }

  const json& command = req.at("command");
  ActionCommand cmd;
  if (command.is_object()) {
    cmd = parse_command(command);
  } else if (to_lower(command.get<std::string>()) == "step") {
    if (!req.contains("action")) return error_response(id, "E_PARSE", "step needs 'action'");
    const json& a = req.at("action");
    cmd = a.is_string() ? parse_command(std::string_view(a.get<std::string>())) : parse_command(a);
  } else {
    cmd = parse_command(std::string_view(command.get<std::string>()));
  }
  return step_response(id, env.step(cmd), env);
}

json Session::solve_ik(const json& req, const json& id) {
  if (!req.contains("target")) return error_response(id, "E_PARSE", "solveik needs 'target'");
  const Eigen::Matrix4d target = matrix_from_json(req.at("target"));
  auto arm = parse_arm(get_string(req, "arm", "left"));
  if (!arm) return error_response(id, "E_PARSE", "unknown arm");

  const Environment* e = env(get_string(req, "env", "default"));
  RobotProfile profile = e ? e->config().exec.robot.profile : RobotProfile::kX1;
  if (req.contains("robot")) {
    auto p = parse_profile(get_string(req, "robot", "x1"));
    if (!p) return error_response(id, "E_PARSE", "unknown robot");
    profile = *p;
  }
  const RobotConfig& robot = config_.engine.robots.at(profile);
  std::string mode = to_lower(get_string(req, "mode", profile == RobotProfile::kX1
                                                          ? "decoupled"
                                                          : "wholebody"));
  JointVector lq{std::vector<double>(robot.left.n_joints(), 0.0), {}};
  JointVector rq{std::vector<double>(robot.right.n_joints(), 0.0), {}};
  if (e != nullptr && e->config().exec.robot.profile == profile) {
    lq = e->world().robot.left.joints;
    rq = e->world().robot.right.joints;
  }
  JointVector solution;
  try {
    if (mode == "decoupled") {
      solution = solve_ik_decoupled(robot.chain(*arm), Pose::from_homogeneous(target),
                                    *arm == ArmSide::kLeft ? lq : rq);
    } else if (mode == "wholebody") {
      std::pair<Eigen::Matrix4d, Eigen::Matrix4d> targets{
          forward_kinematics(robot.left, lq).homogeneous(),
          forward_kinematics(robot.right, rq).homogeneous()};
      (*arm == ArmSide::kLeft ? targets.first : targets.second) = target;
      WholeBodyOptions options;
      options.balance_bound = std::numeric_limits<double>::infinity();
      options.velocity_weight = robot.velocity_weight;
      auto [ls, rs] = solve_ik_wholebody(robot.left, robot.right, targets, {lq, rq}, options);
      solution = *arm == ArmSide::kLeft ? ls : rs;
    } else {
      return error_response(id, "E_PARSE", "mode must be 'decoupled' or 'wholebody'");
    }
  } catch (const Unreachable& ex) {
    return error_response(id, "E_IK_UNREACHABLE", ex.what());
  } catch (const BalanceViolation& ex) {
    return error_response(id, "E_IK_UNREACHABLE", ex.what());
  }
  Pose reached = forward_kinematics(robot.chain(*arm), solution);
  json r = base_response(id);
  r["success"] = true;
  r["outcome"] = "ok";
  r["feedback"] = {{"arm", std::string(to_string(*arm))},
                   {"mode", mode},
                   {"joints", solution.angles},
                   {"position_error", (reached.translation - target.block<3, 1>(0, 3)).norm()},
                   {"rotation_error",
                    rotation_distance(reached.rotation, target.block<3, 3>(0, 0))}};
  if (e != nullptr) attach_env(r, *e);
  return r;
}

json Session::list_tasks(const json& req, const json& id) {
  const Environment* e = env(get_string(req, "env", "default"));
  const std::string scene_name = get_string(req, "scene", "");
  SceneSpec scene;
  if (!scene_name.empty()) {
    try {
      scene = resolve_scene(scene_name, config_.scene_dir);
    } catch (const UnknownEntity& ex) {
      return error_response(id, "E_UNKNOWN_ENV", ex.what());
    }
  } else if (e != nullptr) {
    scene = e->scene();
  } else {
    return error_response(id, "E_UNKNOWN_ENV", "listtasks needs 'scene' or an environment");
  }
  WorldState initial = load_scene(scene);
  json tasks = json::array();
  if (config_.manifest) {
    for (const auto& t : config_.manifest->tasks) {
      if (t.scene_id != scene.scene_id) continue;
      json j = task_to_json(t);
      j["category"] = std::string(to_string(classify(t)));
      tasks.push_back(std::move(j));
    }
  } else {
    for (const auto& t : instantiate_all(initial)) {
      json j = task_to_json(t);
      j["category"] = std::string(to_string(classify(t)));
      tasks.push_back(std::move(j));
    }
  }
  json r = base_response(id);
  r["success"] = true;
  r["outcome"] = "ok";
  r["feedback"] = {{"scene_id", scene.scene_id}, {"tasks", tasks}};
  if (e != nullptr) attach_env(r, *e);
  return r;
}

// ---------------------------------------------------------------------------

Server::Server(ServerConfig config) : config_(std::move(config)) {}

Server::~Server() { stop(); }

void Server::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw ConfigError(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(config_.port));
  if (::inet_pton(AF_INET, config_.host.c_str(), &addr.sin_addr) != 1) {
    throw ConfigError("bad host " + config_.host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    std::string msg = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw ConfigError("bind " + config_.host + ":" + std::to_string(config_.port) + ": " + msg);
  }
  ::listen(listen_fd_, 16);
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

void Server::accept_loop() {
  while (!stopping_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (stopping_) break;
      if (errno == EINTR) continue;
      break;
    }
    std::lock_guard<std::mutex> lock(mu_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    client_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void Server::serve_connection(int fd) {
  Session session(config_);
  std::string buffer;
  char chunk[4096];
  bool open = true;
  while (open && !stopping_) {
    ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t pos;
    while (open && (pos = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, pos);
      buffer.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::string out = session.handle_line(line) + "\n";
      std::size_t sent = 0;
      while (sent < out.size()) {
        ssize_t k = ::send(fd, out.data() + sent, out.size() - sent, MSG_NOSIGNAL);
        if (k <= 0) {
          open = false;
          break;
        }
        sent += static_cast<std::size_t>(k);
      }
      if (session.malformed_streak() >= kMaxMalformed) open = false;
      if (session.shutdown_requested()) {
        open = false;
        stopping_ = true;
        ::shutdown(listen_fd_, SHUT_RDWR);
      }
    }
    if (buffer.size() > kMaxFrameBytes) break;
  }
  ::shutdown(fd, SHUT_RDWR);
}

void Server::wait() {
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) {
    if (t.joinable()) t.join();
  }
  std::lock_guard<std::mutex> lock(mu_);
  for (int fd : client_fds_) ::close(fd);
  client_fds_.clear();
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
}

void Server::stop() {
  stopping_ = true;
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
  wait();
}

}  // namespace dualhab
