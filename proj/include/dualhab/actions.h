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

// Action commands: parsing, precondition checks and execution.
//
// execute() runs the step pipeline on a value WorldState: validate, solve IK
// for the interaction point and build the joint trajectory, draw one outcome
// from the contingency table, apply the outcome's effects and advance the
// step counter. Failures are reported in the StepResult; execute never throws
// for bad commands.

#ifndef DUALHAB_ACTIONS_H_
#define DUALHAB_ACTIONS_H_

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dualhab/catalog.h"
#include "dualhab/contingency.h"
#include "dualhab/kinematics.h"
#include "dualhab/world.h"
#include "json.hpp"

namespace dualhab {

struct ActionCommand {
  ActionKind kind = ActionKind::kObserve;
  std::optional<ArmSide> arm;
  std::optional<std::string> object_id;
  std::optional<std::string> container_id;
  std::optional<int> magnitude;

  friend bool operator==(const ActionCommand&, const ActionCommand&) = default;
};

// Text form: "(pick, arm=left, objectID=Kitchen_Cup_01)", "(RotateRight
// Magnitude=1)", "(loadstate)" or "loadstate". Keys and the action name are
// case-insensitive; arguments may also be given positionally in the order of
// the command format. Throws ParseError naming the offending token.
ActionCommand parse_command(std::string_view text);
// JSON form: {"action": "rotateright", "magnitude": 1, "arm": ..., "objectID":
// ..., "containerID": ...}.
ActionCommand parse_command(const nlohmann::json& doc);
// Literals and strings would otherwise be ambiguous between the two forms.
inline ActionCommand parse_command(const char* text) {
  return parse_command(std::string_view(text));
}
inline ActionCommand parse_command(const std::string& text) {
  return parse_command(std::string_view(text));
}

std::string to_text(const ActionCommand& cmd);
nlohmann::json to_json(const ActionCommand& cmd);

// One violated precondition. `code` is a stable snake_case identifier.
struct Violation {
  std::string code;
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};
using PreconditionReport = std::vector<Violation>;

struct StepResult {
  bool success = false;
  std::string outcome;  // contingency outcome, "ok", "collision", "conflict",
                        // or "precondition_failed"
  std::optional<std::string> error_message;
  std::vector<std::pair<std::string, std::string>> collisions;
  int trajectory_len = 0;
  PreconditionReport violations;
  // Short human-readable account of what happened.
  std::string message;
  // State feedback after the step (see load_state).
  nlohmann::json feedback;
};

nlohmann::json to_json(const StepResult& result);
StepResult step_result_from_json(const nlohmann::json& doc);

// Engine knobs shared by every step of an episode.
struct ExecContext {
  RobotConfig robot = default_robot_config(RobotProfile::kX1);
  ContingencyTable table = ContingencyTable::defaults();
  DifficultyLevel difficulty = DifficultyLevel::easy();
  int use_limit = 3;           // Use repetitions until IsUsedUp
  int trajectory_points = 16;  // waypoints per arm motion
  // Capacity of fill points (coffee machine, faucet).
  int fill_point_capacity = 1;
  // Search and benchmarking shortcuts. Without kinematics the arms keep their
  // joints and no trajectory is produced; without feedback StepResult's
  // feedback stays null.
  bool solve_kinematics = true;
  bool attach_feedback = true;
};

PreconditionReport validate(const WorldState& world, const ActionCommand& cmd,
                            const ExecContext& ctx = {});

std::pair<WorldState, StepResult> execute(const WorldState& world, const ActionCommand& cmd,
                                          const ExecContext& ctx);

// Both commands are checked against the same pre-step world; outcomes are
// drawn left first, then right, and the pair counts as one step. A right
// command touching the left command's object fails with "conflict".
std::pair<WorldState, std::pair<StepResult, StepResult>> execute_parallel(
    const WorldState& world, const ActionCommand& left, const ActionCommand& right,
    const ExecContext& ctx);

// Applies a sampled outcome of an already validated object-dependent command
// (the effect stage of execute). Throws UnknownOutcome.
std::pair<WorldState, std::string> apply_outcome(const WorldState& world,
                                                 const ActionCommand& cmd,
                                                 const std::string& outcome,
                                                 const ExecContext& ctx = {});

// Robot placement next to an object: the free 4-neighbour cell with the
// smallest (x, y), facing the object. Throws NoFreeAdjacentCell/UnknownEntity.
std::pair<int, int> teleport_cell(const WorldState& world, const std::string& object_id);
Heading facing(int from_x, int from_y, int to_x, int to_y);

// Structured snapshot of robot and objects. Does not touch the state.
nlohmann::json load_state(const WorldState& world);
// load_state restricted to objects in the frontal sector (|bearing| <= 45 deg).
nlohmann::json observe(const WorldState& world);

// Fill points currently dispensing into their contents: toggled-on coffee
// machines and latching faucets.
bool is_running_source(const ObjectInstance& object);

}  // namespace dualhab

#endif  // DUALHAB_ACTIONS_H_
