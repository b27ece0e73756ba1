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

// Engine configuration file and schema checks for every config artifact
// (scenes, contingency tables, manifests, engine configs).

#ifndef DUALHAB_CONFIG_CHECK_H_
#define DUALHAB_CONFIG_CHECK_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dualhab/contingency.h"
#include "dualhab/environment.h"
#include "dualhab/kinematics.h"
#include "dualhab/tasks.h"
#include "json.hpp"

namespace dualhab {

struct EngineConfig {
  std::map<RobotProfile, RobotConfig> robots;
  std::size_t history_capacity = kDefaultHistoryCapacity;
  int use_limit = 3;
  int trajectory_points = 16;
  int fill_point_capacity = 1;
  int max_steps = 50;
};

EngineConfig default_engine_config();
// Keys absent from `doc` keep their defaults. Throws ConfigError.
EngineConfig engine_config_from_json(const nlohmann::json& doc);
EngineConfig load_engine_config(const std::filesystem::path& path);
nlohmann::json to_json(const EngineConfig& config);

EnvConfig make_env_config(const EngineConfig& engine, RobotProfile robot,
                          const DifficultyLevel& difficulty,
                          const ContingencyTable& table = ContingencyTable::defaults());

ContingencyTable load_contingency_file(const std::filesystem::path& path);

// Bundled data locations (overridable with DUALHAB_DATA).
std::filesystem::path data_dir();
std::filesystem::path default_scene_dir();
std::filesystem::path default_manifest_path();

// Scene by id from `dir`, or a path to a scene file.
SceneSpec resolve_scene(const std::string& name_or_path,
                        const std::filesystem::path& dir = default_scene_dir());

struct ValidationIssue {
  std::string file;
  std::string message;
};

enum class ConfigKind { kScene, kContingency, kManifest, kEngine, kUnknown };

// Guesses the artifact kind from the document shape.
ConfigKind detect_kind(const nlohmann::json& doc);

// Checks one file; manifests are checked against scenes in `scene_dir`.
std::vector<ValidationIssue> validate_file(const std::filesystem::path& path,
                                           const std::filesystem::path& scene_dir);

// Binding problems of every manifest task against the given scenes.
std::vector<std::string> validate_manifest(const Manifest& manifest,
                                           const std::vector<SceneSpec>& scenes);

}  // namespace dualhab

#endif  // DUALHAB_CONFIG_CHECK_H_
