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

#include "dualhab/config_check.h"

#include <cstdlib>
#include <fstream>

#include "dualhab/error.h"
#include "dualhab/tasks.h"

namespace dualhab {
namespace {

using json = nlohmann::json;

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
}

RobotConfig robot_from_json(RobotProfile profile, const json& doc, RobotConfig base) {
  if (!doc.is_object()) throw ConfigError("robot entry must be an object");
  for (const auto& [k, v] : doc.items()) {
    if (!v.is_number()) throw ConfigError("robot field '" + k + "' must be a number");
    double x = v.get<double>();
    if (k == "reach_radius") {
      base.reach_radius = x;
    } else if (k == "shoulder_offset") {
      base.shoulder_offset = x;
    } else if (k == "balance_bound") {
      base.balance_bound = x;
    } else if (k == "velocity_weight") {
      base.velocity_weight = x;
    } else {
      throw ConfigError("unknown robot field '" + k + "'");
    }
  }
  if (!(base.reach_radius > 0.0) || !(base.shoulder_offset >= 0.0) ||
      !(base.balance_bound > 0.0) || !(base.velocity_weight >= 0.0)) {
    throw ConfigError(std::string("robot ") + std::string(to_string(profile)) +
                      ": values out of range");
  }
  base.profile = profile;
  base.left = default_arm_chain(ArmSide::kLeft, base.reach_radius, base.shoulder_offset);
  base.right = default_arm_chain(ArmSide::kRight, base.reach_radius, base.shoulder_offset);
  return base;
}

int positive_int(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw ConfigError("'" + key + "' must be a positive integer");
  }
  return static_cast<int>(v.get<long long>());
}

}  // namespace

EngineConfig default_engine_config() {
  EngineConfig c;
  c.robots[RobotProfile::kX1] = default_robot_config(RobotProfile::kX1);
  c.robots[RobotProfile::kH1] = default_robot_config(RobotProfile::kH1);
  return c;
}

EngineConfig engine_config_from_json(const json& doc) {
  EngineConfig c = default_engine_config();
  if (!doc.is_object()) throw ConfigError("engine config must be a JSON object");
  for (const auto& [k, v] : doc.items()) {
    if (k == "robots") {
      if (!v.is_object()) throw ConfigError("'robots' must be an object");
      for (const auto& [name, r] : v.items()) {
        auto profile = parse_profile(name);
        if (!profile) throw ConfigError("unknown robot profile '" + name + "'");
        c.robots[*profile] = robot_from_json(*profile, r, c.robots[*profile]);
      }
    } else if (k == "history_capacity") {
      c.history_capacity = static_cast<std::size_t>(positive_int(v, k));
    } else if (k == "use_limit") {
      c.use_limit = positive_int(v, k);
    } else if (k == "trajectory_points") {
      c.trajectory_points = positive_int(v, k);
      if (c.trajectory_points < 2) throw ConfigError("'trajectory_points' must be at least 2");
    } else if (k == "fill_point_capacity") {
      c.fill_point_capacity = positive_int(v, k);
    } else if (k == "max_steps") {
      c.max_steps = positive_int(v, k);
    } else {
      throw ConfigError("unknown engine config key '" + k + "'");
    }
  }
  return c;
}

EngineConfig load_engine_config(const std::filesystem::path& path) {
  return engine_config_from_json(read_json(path));
}

json to_json(const EngineConfig& c) {
  json robots = json::object();
  for (const auto& [profile, r] : c.robots) {
    robots[std::string(to_string(profile))] = {{"reach_radius", r.reach_radius},
                                               {"shoulder_offset", r.shoulder_offset},
                                               {"balance_bound", r.balance_bound},
                                               {"velocity_weight", r.velocity_weight}};
  }
  return {{"robots", robots},
          {"history_capacity", c.history_capacity},
          {"use_limit", c.use_limit},
          {"trajectory_points", c.trajectory_points},
          {"fill_point_capacity", c.fill_point_capacity},
          {"max_steps", c.max_steps}};
}

EnvConfig make_env_config(const EngineConfig& engine, RobotProfile robot,
                          const DifficultyLevel& difficulty, const ContingencyTable& table) {
  EnvConfig env;
  env.exec.robot = engine.robots.at(robot);
  env.exec.table = table;
  env.exec.difficulty = difficulty;
  env.exec.use_limit = engine.use_limit;
  env.exec.trajectory_points = engine.trajectory_points;
  env.exec.fill_point_capacity = engine.fill_point_capacity;
  env.history_capacity = engine.history_capacity;
  return env;
}

ContingencyTable load_contingency_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::ordered_json::parse_error& e) {
    throw ParseError(e.what());
  }
  return ContingencyTable::from_json(doc, /*start_from_defaults=*/true);
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("DUALHAB_DATA"); env != nullptr && *env != '\0') return env;
  return DUALHAB_DATA_DIR;
}

std::filesystem::path default_scene_dir() { return data_dir() / "scenes"; }
std::filesystem::path default_manifest_path() { return data_dir() / "manifest.json"; }

SceneSpec resolve_scene(const std::string& name_or_path, const std::filesystem::path& dir) {
  std::filesystem::path p(name_or_path);
  if (std::filesystem::is_regular_file(p)) return load_scene_file(p);
  std::filesystem::path candidate = dir / (name_or_path + ".json");
  if (std::filesystem::is_regular_file(candidate)) return load_scene_file(candidate);
  throw UnknownEntity("no scene '" + name_or_path + "' in " + dir.string());
}

ConfigKind detect_kind(const json& doc) {
  if (doc.is_array()) return ConfigKind::kManifest;
  if (!doc.is_object()) return ConfigKind::kUnknown;
  if (doc.contains("scene_id")) return ConfigKind::kScene;
  if (doc.contains("tasks")) return ConfigKind::kManifest;
  if (doc.contains("robots") || doc.contains("history_capacity") || doc.contains("use_limit")) {
    return ConfigKind::kEngine;
  }
  return ConfigKind::kContingency;
}

std::vector<std::string> validate_manifest(const Manifest& manifest,
                                           const std::vector<SceneSpec>& scenes) {
  std::map<std::string, WorldState> worlds;
  for (const auto& s : scenes) worlds.emplace(s.scene_id, load_scene(s));
  std::vector<std::string> problems;
  for (const auto& t : manifest.tasks) {
    auto it = worlds.find(t.scene_id);
    if (it == worlds.end()) {
      problems.push_back(t.task_id + ": unknown scene " + t.scene_id);
      continue;
    }
    for (auto& p : check_binding(it->second, t)) problems.push_back(std::move(p));
  }
  return problems;
}

std::vector<ValidationIssue> validate_file(const std::filesystem::path& path,
                                           const std::filesystem::path& scene_dir) {
  std::vector<ValidationIssue> issues;
  const std::string file = path.string();
  auto issue = [&](std::string msg) { issues.push_back({file, std::move(msg)}); };
  try {
    json doc = read_json(path);
    switch (detect_kind(doc)) {
      case ConfigKind::kScene: {
        SceneSpec spec = parse_scene(doc);
        WorldState w = load_scene(spec);
        for (auto& v : check_invariants(w)) issue(std::move(v));
        break;
      }
      case ConfigKind::kContingency:
        load_contingency_file(path);
        break;
      case ConfigKind::kEngine:
        engine_config_from_json(doc);
        break;
      case ConfigKind::kManifest: {
        Manifest m = load_manifest(path);
        std::vector<SceneSpec> scenes = load_scene_dir(scene_dir);
        for (auto& p : validate_manifest(m, scenes)) issue(std::move(p));
        break;
      }
      case ConfigKind::kUnknown:
        issue("unrecognized document");
        break;
    }
  } catch (const Error& e) {
    issue(e.what());
  }
  return issues;
}

}  // namespace dualhab
