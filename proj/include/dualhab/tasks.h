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

// Task templates, instantiation against scenes, goal evaluation and the
// frozen task manifest.
//
// Goals are stated over object slots. A slot is bound to an object id, but
// when that object breaks the evaluator may re-bind the slot to any intact
// object of the same type, so recovering with a substitute still counts.

#ifndef DUALHAB_TASKS_H_
#define DUALHAB_TASKS_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dualhab/world.h"
#include "json.hpp"

namespace dualhab {

enum class TaskCategory { kSingleArm, kDualArmOptional, kDualArmEssential };
enum class TaskStatus { kInProgress, kSuccess, kFailed };

std::string_view to_string(TaskCategory c);
std::string_view to_string(TaskStatus s);
std::optional<TaskCategory> parse_category(std::string_view s);

struct TaskTemplate {
  std::string name;   // e.g. "pick_objects"
  std::string alias;  // short CLI name, e.g. "pick"
  std::string title;  // row label used in reports
  TaskCategory category;
  std::vector<std::string> slots;
  int manifest_count;  // instances in the bundled manifest
};

const std::vector<TaskTemplate>& task_templates();
// By name or alias. Throws UnknownEntity.
const TaskTemplate& find_template(std::string_view name);

// Sum of manifest_count over all templates.
int manifest_total();

struct TaskInstance {
  std::string task_id;
  std::string template_name;
  std::string scene_id;
  std::vector<std::pair<std::string, std::string>> bindings;  // slot -> object id

  const std::string& bound(std::string_view slot) const;
  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

using SlotAssignment = std::map<std::string, std::string>;

// Every valid binding of `tmpl` in the initial state `world`, in object-id
// order. Throws NoValidBinding when the template does not apply.
std::vector<TaskInstance> instantiate(const WorldState& world, const TaskTemplate& tmpl);

// All templates; templates without bindings are listed in `skipped`.
std::vector<TaskInstance> instantiate_all(const WorldState& world,
                                          std::vector<std::string>* skipped = nullptr);

// Goal predicate under an explicit slot assignment.
bool goal_holds(const WorldState& world, const TaskInstance& task, const SlotAssignment& slots);

// Current assignment after re-binding broken slots, preferring one that
// satisfies the goal. nullopt when some broken slot has no substitute.
std::optional<SlotAssignment> resolve_bindings(const WorldState& world, const TaskInstance& task);

TaskStatus evaluate(const WorldState& world, const TaskInstance& task);
TaskCategory classify(const TaskInstance& task);

// Checks that every binding names an existing object that fits the slot.
// Returns human-readable problems; empty when valid.
std::vector<std::string> check_binding(const WorldState& world, const TaskInstance& task);

// ---------------------------------------------------------------------------
// Manifest: the fixed task list shipped with the scene pack.

nlohmann::json task_to_json(const TaskInstance& task);
TaskInstance task_from_json(const nlohmann::json& doc);

struct Manifest {
  std::vector<TaskInstance> tasks;
};

Manifest load_manifest(const std::filesystem::path& path);
nlohmann::json manifest_to_json(const Manifest& manifest);

// Picks manifest_count instances per template, round-robin over the scenes
// (in scene-id order). Throws NoValidBinding if the pack is too small.
Manifest generate_manifest(const std::vector<SceneSpec>& scenes);

// Per-template instance counts.
std::map<std::string, int> count_by_template(const Manifest& manifest);

// Resolves a CLI task selector against a scene: a full task id, a template
// name or alias, or "<alias>_<type>" (first slot's type, case-insensitive).
// Throws UnknownEntity.
TaskInstance select_task(const WorldState& world, std::string_view selector,
                         const Manifest* manifest = nullptr);

}  // namespace dualhab

#endif  // DUALHAB_TASKS_H_
