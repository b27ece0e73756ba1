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

// Built-in agents and the episode loop.
//
// greedy: a reactive scripted planner. Each step it looks at the world,
// re-binds broken task objects, and emits the next command toward the goal:
// teleport next to the target, fix posture, act. Failed draws are simply
// retried on the next step. Dual-arm essential tasks use parallel commands
// whenever both targets are in reach at once.
//
// random: uniform over a coarse command space, as a floor for comparisons.

#ifndef DUALHAB_AGENTS_H_
#define DUALHAB_AGENTS_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "dualhab/actions.h"
#include "dualhab/environment.h"
#include "dualhab/rng.h"
#include "dualhab/tasks.h"
#include "json.hpp"

namespace dualhab {

using ParallelCommand = std::pair<ActionCommand, ActionCommand>;
using AgentAction = std::variant<ActionCommand, ParallelCommand>;

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  virtual void begin(const TaskInstance& task, std::uint64_t seed) = 0;
  // nullopt: the agent sees no way forward and stops.
  virtual std::optional<AgentAction> act(const WorldState& world, const TaskInstance& task) = 0;
};

class GreedyAgent : public Agent {
 public:
  std::string name() const override { return "greedy"; }
  void begin(const TaskInstance&, std::uint64_t) override { tried_parallel_ = false; }
  std::optional<AgentAction> act(const WorldState& world, const TaskInstance& task) override;

 private:
  bool tried_parallel_ = false;
};

class RandomAgent : public Agent {
 public:
  std::string name() const override { return "random"; }
  void begin(const TaskInstance& task, std::uint64_t seed) override;
  std::optional<AgentAction> act(const WorldState& world, const TaskInstance& task) override;

 private:
  StreamRng rng_;
};

// "greedy" or "random". Throws UnknownEntity.
std::unique_ptr<Agent> make_agent(std::string_view name);

struct EpisodeStep {
  std::uint64_t step = 0;  // step count after the command
  std::vector<std::string> commands;
  std::vector<std::string> outcomes;
  std::vector<bool> success;
};

struct EpisodeReport {
  std::string task_id;
  std::string template_name;
  TaskCategory category = TaskCategory::kSingleArm;
  std::string scene_id;
  std::string agent;
  RobotProfile robot = RobotProfile::kX1;
  std::string difficulty;
  std::uint64_t seed = 0;
  int max_steps = 50;
  TaskStatus status = TaskStatus::kInProgress;
  int steps = 0;
  bool gave_up = false;
  std::vector<EpisodeStep> transcript;
  std::string final_state;  // serialized world
};

// Runs one episode until the task succeeds, fails, the agent stops, or
// max_steps steps have been taken.
EpisodeReport run_episode(const SceneSpec& scene, const TaskInstance& task, Agent& agent,
                          const EnvConfig& config, std::uint64_t seed, int max_steps,
                          bool keep_transcript = true);

nlohmann::json to_json(const EpisodeReport& report);

}  // namespace dualhab

#endif  // DUALHAB_AGENTS_H_
