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

#include "support/single_arm_search.h"

#include <unordered_map>
#include <utility>

#include "dualhab/catalog.h"

namespace dualhab::testing {
namespace {

using AK = ActionKind;

ActionCommand make(AK kind, std::optional<ArmSide> arm = std::nullopt,
                   std::optional<std::string> object = std::nullopt) {
  ActionCommand cmd;
  cmd.kind = kind;
  cmd.arm = arm;
  cmd.object_id = std::move(object);
  return cmd;
}

void append_arm(std::string& out, const ArmState& arm) {
  out += arm.held.value_or("-");
  out += '/';
  out += arm.engaged.value_or("-");
  out += ';';
}

struct Node {
  std::size_t parent;
  ActionCommand via;
  int depth;
};

}  // namespace

std::string search_key(const WorldState& world) {
  const RobotState& r = world.robot;
  std::string out = std::to_string(r.x) + ',' + std::to_string(r.y) + ',' +
                    std::to_string(static_cast<int>(r.heading)) +
                    std::to_string(static_cast<int>(r.posture)) + ';';
  append_arm(out, r.left);
  append_arm(out, r.right);
  for (const auto& [id, o] : world.objects) {
    out += id;
    out += ':';
    out += std::to_string(o.x) + ',' + std::to_string(o.y) + ',' +
           std::to_string(static_cast<int>(o.band)) + ',';
    for (const auto& [flag, value] : o.flags) out += value ? '1' : '0';
    out += o.intact ? 'i' : 'b';
    out += o.spilled ? 's' : '-';
    out += std::to_string(o.use_count);
    for (const auto& c : o.contains) out += '[' + c + ']';
    for (const auto& [action, why] : o.blocked) {
      out += '!' + std::to_string(static_cast<int>(action));
    }
    out += ';';
  }
  return out;
}

std::vector<ActionCommand> single_arm_commands(const WorldState& world, const ExecContext& ctx) {
  std::vector<ActionCommand> cmds;
  for (AK kind : {AK::kMoveAhead, AK::kMoveBack, AK::kMoveLeft, AK::kMoveRight, AK::kRotateLeft,
                  AK::kRotateRight, AK::kCrouch, AK::kStand}) {
    cmds.push_back(make(kind));
  }
  for (const auto& [id, o] : world.objects) {
    cmds.push_back(make(AK::kTeleport, std::nullopt, id));
    for (AK kind : {AK::kPick, AK::kToggle, AK::kOpen, AK::kFill, AK::kSlice, AK::kCook,
                    AK::kUse}) {
      cmds.push_back(make(kind, ArmSide::kLeft, id));
    }
  }
  if (world.robot.left.held) {
    for (const auto& [id, o] : world.objects) {
      if (!type_info(o.type).receptacle) continue;
      ActionCommand place = make(AK::kPlace, ArmSide::kLeft, *world.robot.left.held);
      place.container_id = id;
      cmds.push_back(std::move(place));
    }
  }
  std::vector<ActionCommand> valid;
  for (auto& cmd : cmds) {
    if (validate(world, cmd, ctx).empty()) valid.push_back(std::move(cmd));
  }
  return valid;
}

SearchReport single_arm_search(const SceneSpec& scene, const std::vector<TaskInstance>& tasks,
                               int max_depth) {
  ExecContext ctx;
  ctx.difficulty = DifficultyLevel::easy();
  ctx.solve_kinematics = false;
  ctx.attach_feedback = false;

  SearchReport report;
  std::vector<Node> nodes;
  std::vector<WorldState> frontier;
  std::vector<std::size_t> frontier_ids;
  std::unordered_map<std::string, std::size_t> seen;

  auto visit = [&](const WorldState& w, std::size_t id) {
    for (const auto& task : tasks) {
      if (report.solved_depth.count(task.task_id)) continue;
      if (evaluate(w, task) != TaskStatus::kSuccess) continue;
      report.solved_depth[task.task_id] = nodes[id].depth;
      std::vector<ActionCommand> plan;
      for (std::size_t n = id; n != 0; n = nodes[n].parent) plan.push_back(nodes[n].via);
      report.plans[task.task_id] = {plan.rbegin(), plan.rend()};
    }
  };

  WorldState start = load_scene(scene);
  nodes.push_back({0, {}, 0});
  seen.emplace(search_key(start), 0);
  visit(start, 0);
  frontier.push_back(std::move(start));
  frontier_ids.push_back(0);

  for (int depth = 1; depth <= max_depth && !frontier.empty(); ++depth) {
    std::vector<WorldState> next;
    std::vector<std::size_t> next_ids;
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      const WorldState& w = frontier[f];
      for (const ActionCommand& cmd : single_arm_commands(w, ctx)) {
        auto [after, result] = execute(w, cmd, ctx);
        if (!result.success) continue;
        auto [it, fresh] = seen.emplace(search_key(after), nodes.size());
        if (!fresh) continue;
        nodes.push_back({frontier_ids[f], cmd, depth});
        visit(after, it->second);
        next_ids.push_back(it->second);
        next.push_back(std::move(after));
      }
    }
    frontier = std::move(next);
    frontier_ids = std::move(next_ids);
  }
  report.exhausted = frontier.empty();
  report.states = nodes.size();
  return report;
}

}  // namespace dualhab::testing
