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

// One simulation episode: the current world, its history and the optional
// task being attempted. This is the unit the server and the agents drive.

#ifndef DUALHAB_ENVIRONMENT_H_
#define DUALHAB_ENVIRONMENT_H_

#include <cstdint>
#include <optional>
#include <utility>

#include "dualhab/actions.h"
#include "dualhab/history.h"
#include "dualhab/tasks.h"
#include "dualhab/world.h"

namespace dualhab {

struct EnvConfig {
  ExecContext exec;
  std::size_t history_capacity = kDefaultHistoryCapacity;
  // Without history, undo and redo fail with "undo_disabled".
  bool record_history = true;
};

class Environment {
 public:
  Environment(const SceneSpec& scene, EnvConfig config, std::uint64_t seed,
              std::optional<TaskInstance> task = std::nullopt);

  // Reloads the scene with a new seed and clears the history.
  void reset(std::uint64_t seed);

  // Any command, including undo/redo/loadstate. Never throws for bad input.
  StepResult step(const ActionCommand& cmd);
  std::pair<StepResult, StepResult> step_parallel(const ActionCommand& left,
                                                  const ActionCommand& right);
  StepResult undo();
  // Restores the recorded post-step state and reports the recorded outcome.
  StepResult redo();
  // Feedback without advancing the step counter.
  StepResult load_state() const;

  const WorldState& world() const { return world_; }
  const HistoryStack& history() const { return history_; }
  const EnvConfig& config() const { return config_; }
  const SceneSpec& scene() const { return scene_; }
  const std::optional<TaskInstance>& task() const { return task_; }
  std::optional<TaskStatus> task_status() const;

 private:
  void commit(WorldState next, const StepResult& result);
  StepResult failure(const char* code, const std::string& detail) const;

  SceneSpec scene_;
  EnvConfig config_;
  std::optional<TaskInstance> task_;
  WorldState world_;
  HistoryStack history_;
};

}  // namespace dualhab

#endif  // DUALHAB_ENVIRONMENT_H_
