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

#include "dualhab/environment.h"

#include "dualhab/error.h"

namespace dualhab {

Environment::Environment(const SceneSpec& scene, EnvConfig config, std::uint64_t seed,
                         std::optional<TaskInstance> task)
    : scene_(scene),
      config_(std::move(config)),
      task_(std::move(task)),
      history_(config_.history_capacity) {
  reset(seed);
}

void Environment::reset(std::uint64_t seed) {
  world_ = load_scene(scene_, config_.exec.robot, seed);
  if (config_.record_history) history_.reset(world_);
}

void Environment::commit(WorldState next, const StepResult& result) {
  world_ = std::move(next);
  if (!config_.record_history) return;
  // The feedback is a copy of the state, which the snapshot already holds.
  StepResult stored = result;
  stored.feedback = nullptr;
  history_.record(world_, stored);
}

StepResult Environment::failure(const char* code, const std::string& detail) const {
  StepResult res;
  res.success = false;
  res.outcome = "precondition_failed";
  res.error_message = detail;
  res.violations.push_back({code, detail});
  res.message = "precondition failed: " + detail;
  if (config_.exec.attach_feedback) res.feedback = dualhab::load_state(world_);
  return res;
}

StepResult Environment::step(const ActionCommand& cmd) {
  switch (cmd.kind) {
    case ActionKind::kUndo: return undo();
    case ActionKind::kRedo: return redo();
    case ActionKind::kLoadState: return load_state();
    default: break;
  }
  const std::uint64_t before = world_.step_count;
  auto [next, res] = execute(world_, cmd, config_.exec);
  if (next.step_count != before) {
    commit(std::move(next), res);
  }
  return res;
}

std::pair<StepResult, StepResult> Environment::step_parallel(const ActionCommand& left,
                                                             const ActionCommand& right) {
  auto [next, results] = execute_parallel(world_, left, right, config_.exec);
  // History keeps the left result; the pair is a single step.
  commit(std::move(next), results.first);
  return results;
}

StepResult Environment::undo() {
  if (!config_.record_history) return failure("undo_disabled", "history is disabled");
  try {
    world_ = history_.undo();
  } catch (const NothingToUndo& e) {
    return failure("nothing_to_undo", std::string("NothingToUndo: ") + e.what());
  }
  StepResult res;
  res.success = true;
  res.outcome = "ok";
  res.message = "restored step " + std::to_string(world_.step_count);
  if (config_.exec.attach_feedback) res.feedback = dualhab::load_state(world_);
  return res;
}

StepResult Environment::redo() {
  if (!config_.record_history) return failure("undo_disabled", "history is disabled");
  try {
    world_ = history_.redo();
  } catch (const NothingToRedo& e) {
    return failure("nothing_to_redo", std::string("NothingToRedo: ") + e.what());
  }
  const Snapshot& snap = history_.snapshots()[history_.cursor()];
  StepResult res = snap.result.value_or(StepResult{});
  res.message = "replayed step " + std::to_string(world_.step_count) +
                (res.message.empty() ? "" : ": " + res.message);
  res.feedback = config_.exec.attach_feedback ? dualhab::load_state(world_) : nullptr;
  return res;
}

StepResult Environment::load_state() const {
  StepResult res;
  res.success = true;
  res.outcome = "ok";
  res.message = "state at step " + std::to_string(world_.step_count);
  res.feedback = dualhab::load_state(world_);
  return res;
}

std::optional<TaskStatus> Environment::task_status() const {
  if (!task_) return std::nullopt;
  return evaluate(world_, *task_);
}

}  // namespace dualhab
