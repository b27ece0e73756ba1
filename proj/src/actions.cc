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

#include "dualhab/actions.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <regex>
#include <set>

#include "dualhab/error.h"

namespace dualhab {
namespace {

using nlohmann::json;

enum class Param { kArm, kObject, kContainer, kMagnitude };

// Argument list of each command format, in positional order.
std::vector<Param> params_of(ActionKind kind) {
  switch (kind) {
    case ActionKind::kMoveAhead:
    case ActionKind::kMoveBack:
    case ActionKind::kMoveLeft:
    case ActionKind::kMoveRight:
    case ActionKind::kRotateLeft:
    case ActionKind::kRotateRight:
      return {Param::kMagnitude};
    case ActionKind::kPick:
    case ActionKind::kToggle:
    case ActionKind::kOpen:
    case ActionKind::kFill:
    case ActionKind::kSlice:
    case ActionKind::kCook:
    case ActionKind::kUse:
      return {Param::kArm, Param::kObject};
    case ActionKind::kPlace:
      return {Param::kArm, Param::kObject, Param::kContainer};
    case ActionKind::kLift:
    case ActionKind::kTeleport:
      return {Param::kObject};
    default:
      return {};
  }
}

std::string_view param_name(Param p) {
  switch (p) {
    case Param::kArm: return "arm";
    case Param::kObject: return "objectID";
    case Param::kContainer: return "containerID";
    case Param::kMagnitude: return "Magnitude";
  }
  return "?";
}

std::optional<Param> parse_param(std::string_view key) {
  std::string k = to_lower(key);
  if (k == "arm") return Param::kArm;
  if (k == "objectid" || k == "object") return Param::kObject;
  if (k == "containerid" || k == "container") return Param::kContainer;
  if (k == "magnitude") return Param::kMagnitude;
  return std::nullopt;
}

ActionCommand build(ActionKind kind, const std::map<Param, std::string>& args) {
  if (kind == ActionKind::kSolveIK) {
    throw ParseError("solveik: takes a pose target, send it as a protocol command");
  }
  ActionCommand cmd;
  cmd.kind = kind;
  const std::vector<Param> allowed = params_of(kind);
  for (const auto& [p, value] : args) {
    if (std::find(allowed.begin(), allowed.end(), p) == allowed.end()) {
      throw ParseError(std::string(param_name(p)) + ": not an argument of " +
                       std::string(to_string(kind)));
    }
  }
  for (Param p : allowed) {
    auto it = args.find(p);
    if (it == args.end()) {
      throw ParseError(std::string(to_string(kind)) + ": missing " + std::string(param_name(p)));
    }
    const std::string& value = it->second;
    switch (p) {
      case Param::kArm: {
        auto arm = parse_arm(value);
        if (!arm) throw ParseError(value + ": arm must be left or right");
        cmd.arm = *arm;
        break;
      }
      case Param::kObject:
        if (value.empty()) throw ParseError("objectID: empty");
        cmd.object_id = value;
        break;
      case Param::kContainer:
        if (value.empty()) throw ParseError("containerID: empty");
        cmd.container_id = value;
        break;
      case Param::kMagnitude: {
        double m = 0.0;
        std::size_t used = 0;
        try {
          m = std::stod(value, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != value.size() || m != std::floor(m) || m < 1.0 || m > 1000.0) {
          throw ParseError(value + ": Magnitude must be a positive whole number");
        }
        cmd.magnitude = static_cast<int>(m);
        break;
      }
    }
  }
  return cmd;
}

std::string join_violations(const PreconditionReport& report) {
  std::string out;
  for (const auto& v : report) {
    if (!out.empty()) out += "; ";
    out += v.code + ": " + v.detail;
  }
  return out;
}

bool fill_point(ObjectType type) {
  return type == ObjectType::kCoffeeMachine || type == ObjectType::kFaucet;
}

bool reachable(const WorldState& world, ArmSide arm, const ObjectInstance& object) {
  return check_reachable(world.robot, arm, object);
}

std::string arm_name(ArmSide side) { return std::string(to_string(side)); }

void check_arm_free(const WorldState& world, ArmSide side, PreconditionReport& r,
                    const std::string* allowed_engagement = nullptr) {
  const ArmState& arm = world.robot.arm(side);
  if (arm.held) {
    r.push_back({"arm_occupied", arm_name(side) + " arm holds " + *arm.held});
  } else if (arm.engaged && (allowed_engagement == nullptr || *arm.engaged != *allowed_engagement)) {
    r.push_back({"arm_occupied", arm_name(side) + " arm keeps " + *arm.engaged + " engaged"});
  }
}

bool has_knife(const WorldState& world) {
  for (ArmSide side : {ArmSide::kLeft, ArmSide::kRight}) {
    const auto& held = world.robot.arm(side).held;
    if (!held) continue;
    const ObjectInstance& o = world.object(*held);
    if (o.type == ObjectType::kKnife && o.intact) return true;
  }
  return false;
}

const ObjectInstance* running_faucet_in_reach(const WorldState& world) {
  for (const auto& [id, o] : world.objects) {
    if (o.type != ObjectType::kFaucet || !o.intact || !o.flag(StateFlag::kIsToggledOn)) continue;
    if (reachable(world, ArmSide::kLeft, o) || reachable(world, ArmSide::kRight, o)) return &o;
  }
  return nullptr;
}

void validate_object_action(const WorldState& world, const ActionCommand& cmd,
                            const ExecContext& ctx, PreconditionReport& r) {
  auto add = [&](const char* code, std::string detail) { r.push_back({code, std::move(detail)}); };
  if (cmd.kind != ActionKind::kLift && !cmd.arm) {
    add("missing_arm", std::string(to_string(cmd.kind)) + " needs an arm");
    return;
  }
  if (!cmd.object_id) {
    add("unknown_object", "no objectID given");
    return;
  }
  const ObjectInstance* obj = world.find(*cmd.object_id);
  if (obj == nullptr) {
    add("unknown_object", *cmd.object_id + " is not in the scene");
    return;
  }
  if (!obj->intact) {
    add("not_intact", obj->id + " is broken");
    return;
  }
  const ArmSide arm = cmd.arm.value_or(ArmSide::kLeft);
  const std::string& id = obj->id;
  auto not_actionable = [&](std::string_view what) {
    add("not_actionable", id + " is not " + std::string(what));
  };
  auto terminal = [&](StateFlag f) {
    if (obj->flag(f)) add("terminal_state", id + " is already " + std::string(to_string(f)));
  };
  auto need_reach = [&](ArmSide side, const ObjectInstance& target) {
    if (!reachable(world, side, target)) {
      add("unreachable", target.id + " is out of reach of the " + arm_name(side) + " arm");
    }
  };
  auto need_empty = [&]() {
    if (!obj->contains.empty()) add("not_empty", id + " still contains " + obj->contains.front());
  };

  switch (cmd.kind) {
    case ActionKind::kPick: {
      if (!has_actionable(obj->type, Actionable::kPickupable)) return not_actionable("pickupable");
      if (held_by_robot(world, id)) {
        add("already_held", id + " is already held");
        return;
      }
      check_arm_free(world, arm, r);
      need_empty();
      if (const ObjectInstance* c = container_of(world, id)) {
        if (c->licenses(StateFlag::kIsOpen) && !c->flag(StateFlag::kIsOpen)) {
          add("container_closed", c->id + " is closed");
        }
      }
      need_reach(arm, *obj);
      return;
    }
    case ActionKind::kLift: {
      if (!has_actionable(obj->type, Actionable::kMovable)) return not_actionable("movable");
      terminal(StateFlag::kIsLifted);
      if (!world.robot.left.free() || !world.robot.right.free()) {
        add("arms_busy", "lifting needs both arms free");
      }
      need_empty();
      need_reach(ArmSide::kLeft, *obj);
      need_reach(ArmSide::kRight, *obj);
      return;
    }
    case ActionKind::kPlace: {
      if (world.robot.arm(arm).held != id) {
        add("not_held", "the " + arm_name(arm) + " arm does not hold " + id);
        return;
      }
      if (obj->flag(StateFlag::kIsLifted)) {
        add("object_lifted", id + " is carried with both arms");
        return;
      }
      const ObjectInstance* c = cmd.container_id ? world.find(*cmd.container_id) : nullptr;
      if (c == nullptr) {
        add("unknown_container", cmd.container_id.value_or("<none>") + " is not in the scene");
        return;
      }
      if (!c->intact) {
        add("not_intact", c->id + " is broken");
        return;
      }
      // A sprung tap has no surface under it.
      if (!type_info(c->type).receptacle || c->id == id ||
          (c->type == ObjectType::kFaucet && c->springs_shut)) {
        add("not_receptacle", c->id + " cannot take objects");
        return;
      }
      if (held_by_robot(world, c->id)) add("container_held", c->id + " is held");
      if (c->licenses(StateFlag::kIsOpen) && !c->flag(StateFlag::kIsOpen)) {
        add("container_closed", c->id + " is closed");
      }
      if (fill_point(c->type) &&
          static_cast<int>(c->contains.size()) >= ctx.fill_point_capacity) {
        add("container_full", c->id + " has no free spot");
      }
      need_reach(arm, *c);
      return;
    }
    case ActionKind::kToggle: {
      if (!has_actionable(obj->type, Actionable::kToggleable)) return not_actionable("toggleable");
      check_arm_free(world, arm, r, &id);
      need_reach(arm, *obj);
      return;
    }
    case ActionKind::kOpen: {
      if (!has_actionable(obj->type, Actionable::kOpenable)) return not_actionable("openable");
      terminal(StateFlag::kIsOpen);
      check_arm_free(world, arm, r);
      need_reach(arm, *obj);
      return;
    }
    case ActionKind::kFill: {
      if (!is_fillable_container(obj->type)) return not_actionable("a fillable container");
      terminal(StateFlag::kIsFilled);
      auto holder = holder_of(world, id);
      if (holder) {
        if (*holder != arm) {
          add("arm_mismatch", id + " is held by the " + arm_name(*holder) + " arm");
        } else if (running_faucet_in_reach(world) == nullptr) {
          add("no_active_source", "no running faucet within reach");
        }
        return;
      }
      const ObjectInstance* c = container_of(world, id);
      if (c == nullptr || !is_running_source(*c)) {
        add("no_active_source", id + " is neither held under a running tap nor in a running fill point");
        return;
      }
      need_reach(arm, *obj);
      return;
    }
    case ActionKind::kSlice: {
      if (!has_actionable(obj->type, Actionable::kSliceable)) return not_actionable("sliceable");
      terminal(StateFlag::kIsSliced);
      if (!has_knife(world)) add("no_knife", "slicing needs a knife in hand");
      need_reach(arm, *obj);
      return;
    }
    case ActionKind::kCook: {
      if (!obj->licenses(StateFlag::kIsCooked)) return not_actionable("cookable");
      terminal(StateFlag::kIsCooked);
      need_reach(arm, *obj);
      return;
    }
    case ActionKind::kUse: {
      if (!obj->licenses(StateFlag::kIsUsedUp)) return not_actionable("usable");
      terminal(StateFlag::kIsUsedUp);
      need_reach(arm, *obj);
      return;
    }
    default:
      return;
  }
}

// ---------------------------------------------------------------------------
// Effects.

void release_engagements(WorldState& world) {
  for (ArmSide side : {ArmSide::kLeft, ArmSide::kRight}) {
    auto engaged = world.robot.arm(side).engaged;
    if (!engaged) continue;
    apply_effect_in_place(world, effect::Disengage{side});
    const ObjectInstance& o = world.object(*engaged);
    if (!o.springs_shut) continue;
    if (o.flag(StateFlag::kIsOpen)) {
      apply_effect_in_place(world, effect::SetFlag{o.id, StateFlag::kIsOpen, false});
    }
    if (o.flag(StateFlag::kIsToggledOn)) {
      apply_effect_in_place(world, effect::SetFlag{o.id, StateFlag::kIsToggledOn, false});
    }
  }
}

// A source that was just switched on fills what is positioned at it: the
// contents of a coffee machine or a latching tap, and any container the robot
// holds when the source is a tap.
std::vector<std::string> dispense(WorldState& world, const ObjectInstance& source) {
  std::set<std::string> targets;
  bool has_platform = source.type == ObjectType::kCoffeeMachine ||
                      (source.type == ObjectType::kFaucet && !source.springs_shut);
  if (has_platform) targets.insert(source.contains.begin(), source.contains.end());
  if (source.type == ObjectType::kFaucet) {
    for (ArmSide side : {ArmSide::kLeft, ArmSide::kRight}) {
      if (world.robot.arm(side).held) targets.insert(*world.robot.arm(side).held);
    }
  }
  std::vector<std::string> filled;
  for (const auto& id : targets) {
    const ObjectInstance& o = world.object(id);
    if (!o.intact || !is_fillable_container(o.type) || o.flag(StateFlag::kIsFilled)) continue;
    apply_effect_in_place(world, effect::SetFlag{id, StateFlag::kIsFilled, true});
    filled.push_back(id);
  }
  return filled;
}

std::string apply_outcome_in_place(WorldState& world, const ActionCommand& cmd,
                                   const std::string& outcome_name, const ExecContext& ctx) {
  if (!is_known_outcome(outcome_name)) throw UnknownOutcome("unknown outcome '" + outcome_name + "'");
  const std::string id = cmd.object_id.value_or("");
  const ObjectInstance& obj = world.object(id);
  const ArmSide arm = cmd.arm.value_or(ArmSide::kLeft);
  const std::string kind = std::string(to_string(cmd.kind));

  if (outcome_name == outcome::kBroken) {
    apply_effect_in_place(world, effect::MarkBroken{id});
    return id + " broke";
  }
  if (outcome_name == outcome::kNothingHappens) return kind + " on " + id + " had no effect";
  if (outcome_name == outcome::kLiquidSpill) {
    apply_effect_in_place(world, effect::MarkSpilled{id});
    return "liquid spilled from " + id;
  }
  if (outcome_name == outcome::kPartialSlice) return id + " was only partly sliced";
  if (outcome_name == outcome::kLocked || outcome_name == outcome::kStuck) {
    apply_effect_in_place(world, effect::Block{id, cmd.kind, outcome_name});
    return id + " is " + outcome_name;
  }
  if (outcome_name == outcome::kHalfOpen) return id + " is half_open";

  switch (cmd.kind) {
    case ActionKind::kPick:
      apply_effect_in_place(world, effect::Grasp{arm, id});
      return "picked up " + id + " with the " + arm_name(arm) + " arm";
    case ActionKind::kLift:
      apply_effect_in_place(world, effect::GraspBoth{id});
      return "lifted " + id + " with both arms";
    case ActionKind::kPlace:
      apply_effect_in_place(world, effect::PutInto{arm, id, cmd.container_id.value_or("")});
      return "placed " + id + " into " + cmd.container_id.value_or("");
    case ActionKind::kToggle: {
      bool on = !obj.flag(StateFlag::kIsToggledOn);
      bool springs = obj.springs_shut;
      bool source = type_info(obj.type).liquid_source;
      apply_effect_in_place(world, effect::SetFlag{id, StateFlag::kIsToggledOn, on});
      std::string msg = "switched " + id + (on ? " on" : " off");
      if (on) {
        if (springs) apply_effect_in_place(world, effect::Engage{arm, id});
        if (source) {
          for (const auto& f : dispense(world, world.object(id))) msg += "; filled " + f;
        }
      } else {
        for (ArmSide side : {ArmSide::kLeft, ArmSide::kRight}) {
          if (world.robot.arm(side).engaged == id) {
            apply_effect_in_place(world, effect::Disengage{side});
          }
        }
      }
      return msg;
    }
    case ActionKind::kOpen:
      apply_effect_in_place(world, effect::SetFlag{id, StateFlag::kIsOpen, true});
      if (obj.springs_shut) {
        apply_effect_in_place(world, effect::Engage{arm, id});
        return "holding " + id + " open with the " + arm_name(arm) + " arm";
      }
      return "opened " + id;
    case ActionKind::kFill:
      apply_effect_in_place(world, effect::SetFlag{id, StateFlag::kIsFilled, true});
      return "filled " + id;
    case ActionKind::kSlice:
      apply_effect_in_place(world, effect::SetFlag{id, StateFlag::kIsSliced, true});
      return "sliced " + id;
    case ActionKind::kCook:
      apply_effect_in_place(world, effect::SetFlag{id, StateFlag::kIsCooked, true});
      return "cooked " + id;
    case ActionKind::kUse: {
      apply_effect_in_place(world, effect::CountUse{id});
      if (world.object(id).use_count >= ctx.use_limit) {
        apply_effect_in_place(world, effect::SetFlag{id, StateFlag::kIsUsedUp, true});
        return id + " is used up";
      }
      return "used " + id;
    }
    default:
      throw UnknownOutcome(kind + " has no contingency outcomes");
  }
}

// ---------------------------------------------------------------------------
// Motion planning for object-dependent actions.

struct Reach {
  ArmSide side;
  const ObjectInstance* target;
};

struct MotionPlan {
  std::vector<effect::SetJoints> joints;
  int trajectory_len = 0;
  std::optional<Violation> failure;
};

Pose interaction_pose(const WorldState& world, const ExecContext& ctx, ArmSide side,
                      const ObjectInstance& target) {
  auto [forward, left] = robot_frame_offset(world.robot, target.x, target.y);
  const KinematicChain& chain = ctx.robot.chain(side);
  JointVector q = interaction_joints(chain, side, forward, left, target.band,
                                     world.robot.reach_radius);
  return forward_kinematics(chain, q);
}

MotionPlan plan_motion(const WorldState& world, const std::vector<Reach>& reaches,
                       const ExecContext& ctx, bool enforce_balance) {
  MotionPlan plan;
  if (!ctx.solve_kinematics) return plan;
  std::map<ArmSide, JointVector> solutions;
  try {
    if (world.robot.profile == RobotProfile::kX1) {
      for (const Reach& r : reaches) {
        Pose target = interaction_pose(world, ctx, r.side, *r.target);
        solutions[r.side] = solve_ik_decoupled(ctx.robot.chain(r.side), target,
                                               world.robot.arm(r.side).joints);
      }
    } else {
      std::pair<Eigen::Matrix4d, Eigen::Matrix4d> targets;
      const JointVector& lq = world.robot.left.joints;
      const JointVector& rq = world.robot.right.joints;
      targets.first = forward_kinematics(ctx.robot.left, lq).homogeneous();
      targets.second = forward_kinematics(ctx.robot.right, rq).homogeneous();
      for (const Reach& r : reaches) {
        Eigen::Matrix4d t = interaction_pose(world, ctx, r.side, *r.target).homogeneous();
        (r.side == ArmSide::kLeft ? targets.first : targets.second) = t;
      }
      WholeBodyOptions options;
      options.balance_bound =
          enforce_balance ? ctx.robot.balance_bound : std::numeric_limits<double>::infinity();
      options.velocity_weight = ctx.robot.velocity_weight;
      auto [ls, rs] = solve_ik_wholebody(ctx.robot.left, ctx.robot.right, targets, {lq, rq},
                                         options);
      for (const Reach& r : reaches) {
        solutions[r.side] = r.side == ArmSide::kLeft ? ls : rs;
      }
    }
  } catch (const BalanceViolation& e) {
    plan.failure = Violation{"balance_violation", e.what()};
    return plan;
  } catch (const Unreachable& e) {
    plan.failure = Violation{"ik_unreachable", e.what()};
    return plan;
  }
  for (const auto& [side, q] : solutions) {
    Trajectory traj = interpolate_trajectory(world.robot.arm(side).joints, q,
                                             ctx.trajectory_points, SplineBoundary::kClamped);
    plan.trajectory_len = std::max(plan.trajectory_len, static_cast<int>(traj.waypoints.size()));
    plan.joints.push_back(effect::SetJoints{side, traj.waypoints.back().angles});
  }
  return plan;
}

std::vector<Reach> reaches_for(const WorldState& world, const ActionCommand& cmd) {
  const ObjectInstance& obj = world.object(*cmd.object_id);
  if (cmd.kind == ActionKind::kLift) return {{ArmSide::kLeft, &obj}, {ArmSide::kRight, &obj}};
  if (cmd.kind == ActionKind::kPlace) return {{*cmd.arm, &world.object(*cmd.container_id)}};
  return {{*cmd.arm, &obj}};
}

StepResult precondition_failure(PreconditionReport report) {
  StepResult res;
  res.success = false;
  res.outcome = "precondition_failed";
  res.error_message = join_violations(report);
  res.message = "precondition failed: " + *res.error_message;
  res.violations = std::move(report);
  return res;
}

// Outcome draw and effects for a validated object-dependent command whose
// motion has been planned. Blocked objects return their block without a draw.
StepResult draw_and_apply(WorldState& world, const ActionCommand& cmd, const ExecContext& ctx,
                          const MotionPlan& plan) {
  StepResult res;
  res.trajectory_len = plan.trajectory_len;
  for (const auto& j : plan.joints) apply_effect_in_place(world, j);
  const ObjectInstance& obj = world.object(*cmd.object_id);
  OutcomeDistribution dist =
      scale_difficulty(outcome_table(obj, cmd.kind, ctx.table), ctx.difficulty);
  res.outcome = sample_outcome(dist, world.rng);
  res.success = res.outcome == outcome::kSuccess;
  res.message = apply_outcome_in_place(world, cmd, res.outcome, ctx);
  return res;
}

std::optional<StepResult> blocked_result(const WorldState& world, const ActionCommand& cmd) {
  const ObjectInstance& obj = world.object(*cmd.object_id);
  auto it = obj.blocked.find(cmd.kind);
  if (it == obj.blocked.end()) return std::nullopt;
  StepResult res;
  res.success = false;
  res.outcome = it->second;
  res.message = obj.id + " is " + it->second;
  return res;
}

std::optional<Direction> move_direction(ActionKind kind) {
  switch (kind) {
    case ActionKind::kMoveAhead: return Direction::kAhead;
    case ActionKind::kMoveBack: return Direction::kBack;
    case ActionKind::kMoveLeft: return Direction::kLeft;
    case ActionKind::kMoveRight: return Direction::kRight;
    default: return std::nullopt;
  }
}

StepResult execute_motion(WorldState& world, const ActionCommand& cmd) {
  StepResult res;
  res.success = true;
  res.outcome = "ok";
  if (auto dir = move_direction(cmd.kind)) {
    auto [dx, dy] = heading_vector(world.robot.heading);
    switch (*dir) {
      case Direction::kAhead: break;
      case Direction::kBack: dx = -dx, dy = -dy; break;
      case Direction::kLeft: std::tie(dx, dy) = std::pair{-dy, dx}; break;
      case Direction::kRight: std::tie(dx, dy) = std::pair{dy, -dx}; break;
    }
    int x = world.robot.x;
    int y = world.robot.y;
    for (int i = 0; i < *cmd.magnitude; ++i) {
      x += dx;
      y += dy;
      std::string blocker;
      if (!in_grid(world, x, y)) {
        blocker = "boundary";
      } else {
        for (const auto& [id, o] : world.objects) {
          if (o.x == x && o.y == y && is_standing(world, o)) {
            blocker = id;
            break;
          }
        }
      }
      if (!blocker.empty()) {
        res.success = false;
        res.outcome = "collision";
        res.collisions.emplace_back("robot", blocker);
        res.message = "blocked by " + blocker + " at (" + std::to_string(x) + "," +
                      std::to_string(y) + ")";
        return res;
      }
    }
    release_engagements(world);
    apply_effect_in_place(world, effect::MoveRobot{*dir, *cmd.magnitude});
    res.message = "moved to (" + std::to_string(world.robot.x) + "," +
                  std::to_string(world.robot.y) + ")";
    return res;
  }
  switch (cmd.kind) {
    case ActionKind::kRotateLeft:
    case ActionKind::kRotateRight: {
      int turns = *cmd.magnitude * (cmd.kind == ActionKind::kRotateLeft ? 1 : -1);
      release_engagements(world);
      apply_effect_in_place(world, effect::RotateRobot{turns});
      res.message = "now facing " + std::string(to_string(world.robot.heading));
      return res;
    }
    case ActionKind::kTeleport: {
      std::pair<int, int> cell;
      try {
        cell = teleport_cell(world, *cmd.object_id);
      } catch (const NoFreeAdjacentCell& e) {
        return precondition_failure({{"no_free_adjacent_cell", e.what()}});
      }
      const ObjectInstance& obj = world.object(*cmd.object_id);
      Heading h = facing(cell.first, cell.second, obj.x, obj.y);
      release_engagements(world);
      apply_effect_in_place(world, effect::PlaceRobot{cell.first, cell.second, h});
      res.message = "teleported next to " + obj.id;
      return res;
    }
    case ActionKind::kCrouch:
    case ActionKind::kStand: {
      release_engagements(world);
      Posture p = cmd.kind == ActionKind::kCrouch ? Posture::kCrouch : Posture::kStand;
      apply_effect_in_place(world, effect::SetPosture{p});
      res.message = "posture " + std::string(to_string(p));
      return res;
    }
    default:
      break;
  }
  res.message = "observed";
  return res;
}

}  // namespace

// ---------------------------------------------------------------------------
// Parsing.

ActionCommand parse_command(std::string_view text) {
  static const std::regex kAroundEquals(R"(\s*=\s*)");
  std::string s = std::regex_replace(std::string(text), kAroundEquals, "=");
  auto first = s.find_first_not_of(" \t\r\n");
  auto last = s.find_last_not_of(" \t\r\n");
  if (first == std::string::npos) throw ParseError("<empty>: no command");
  s = s.substr(first, last - first + 1);
  if (s.front() == '(') {
    if (s.back() != ')') throw ParseError(s + ": unbalanced parenthesis");
    s = s.substr(1, s.size() - 2);
  }
  std::vector<std::string> tokens;
  std::string current;
  for (char c : s) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else if (c == '(' || c == ')') {
      throw ParseError(std::string(1, c) + ": unexpected parenthesis");
    } else {
      current += c;
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  if (tokens.empty()) throw ParseError("<empty>: no command");

  auto kind = parse_action_kind(tokens.front());
  if (!kind) throw ParseError(tokens.front() + ": unknown action");
  const std::vector<Param> order = params_of(*kind);
  std::map<Param, std::string> args;
  std::size_t positional = 0;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    Param p;
    std::string value;
    if (auto eq = tok.find('='); eq != std::string::npos) {
      auto parsed = parse_param(tok.substr(0, eq));
      if (!parsed) throw ParseError(tok + ": unknown argument");
      p = *parsed;
      value = tok.substr(eq + 1);
    } else {
      if (positional >= order.size()) throw ParseError(tok + ": unexpected argument");
      p = order[positional++];
      value = tok;
    }
    if (!args.emplace(p, value).second) throw ParseError(tok + ": argument given twice");
  }
  return build(*kind, args);
}

ActionCommand parse_command(const json& doc) {
  if (!doc.is_object()) throw ParseError(doc.dump() + ": expected an object");
  if (!doc.contains("action") || !doc.at("action").is_string()) {
    throw ParseError(doc.dump() + ": missing string field 'action'");
  }
  std::string name = doc.at("action").get<std::string>();
  auto kind = parse_action_kind(name);
  if (!kind) throw ParseError(name + ": unknown action");
  std::map<Param, std::string> args;
  for (const auto& [key, value] : doc.items()) {
    if (key == "action") continue;
    auto p = parse_param(key);
    if (!p) throw ParseError(key + ": unknown argument");
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_number()) {
      text = value.dump();
    } else {
      throw ParseError(key + ": expected a string or number");
    }
    if (!args.emplace(*p, text).second) throw ParseError(key + ": argument given twice");
  }
  return build(*kind, args);
}

std::string to_text(const ActionCommand& cmd) {
  std::string out = "(" + std::string(to_string(cmd.kind));
  if (cmd.magnitude) out += ", Magnitude=" + std::to_string(*cmd.magnitude);
  if (cmd.arm) out += ", arm=" + arm_name(*cmd.arm);
  if (cmd.object_id) out += ", objectID=" + *cmd.object_id;
  if (cmd.container_id) out += ", containerID=" + *cmd.container_id;
  return out + ")";
}

json to_json(const ActionCommand& cmd) {
  json j;
  j["action"] = std::string(to_string(cmd.kind));
  if (cmd.magnitude) j["magnitude"] = *cmd.magnitude;
  if (cmd.arm) j["arm"] = arm_name(*cmd.arm);
  if (cmd.object_id) j["objectID"] = *cmd.object_id;
  if (cmd.container_id) j["containerID"] = *cmd.container_id;
  return j;
}

json to_json(const StepResult& r) {
  json j;
  j["success"] = r.success;
  j["outcome"] = r.outcome;
  j["error_message"] = r.error_message ? json(*r.error_message) : json(nullptr);
  j["collisions"] = json::array();
  for (const auto& [a, b] : r.collisions) j["collisions"].push_back({a, b});
  j["trajectory_len"] = r.trajectory_len;
  j["violations"] = json::array();
  for (const auto& v : r.violations) j["violations"].push_back({{"code", v.code}, {"detail", v.detail}});
  j["message"] = r.message;
  j["feedback"] = r.feedback;
  return j;
}

StepResult step_result_from_json(const json& j) {
  StepResult r;
  r.success = j.at("success").get<bool>();
  r.outcome = j.at("outcome").get<std::string>();
  if (!j.at("error_message").is_null()) r.error_message = j.at("error_message").get<std::string>();
  for (const auto& c : j.at("collisions")) {
    r.collisions.emplace_back(c.at(0).get<std::string>(), c.at(1).get<std::string>());
  }
  r.trajectory_len = j.at("trajectory_len").get<int>();
  for (const auto& v : j.at("violations")) {
    r.violations.push_back({v.at("code").get<std::string>(), v.at("detail").get<std::string>()});
  }
  r.message = j.at("message").get<std::string>();
  r.feedback = j.at("feedback");
  return r;
}

// ---------------------------------------------------------------------------

PreconditionReport validate(const WorldState& world, const ActionCommand& cmd,
                            const ExecContext& ctx) {
  PreconditionReport r;
  switch (cmd.kind) {
    case ActionKind::kMoveAhead:
    case ActionKind::kMoveBack:
    case ActionKind::kMoveLeft:
    case ActionKind::kMoveRight:
    case ActionKind::kRotateLeft:
    case ActionKind::kRotateRight:
      if (!cmd.magnitude || *cmd.magnitude < 1) {
        r.push_back({"bad_magnitude", "magnitude must be a positive whole number"});
      }
      return r;
    case ActionKind::kTeleport: {
      const ObjectInstance* obj = cmd.object_id ? world.find(*cmd.object_id) : nullptr;
      if (obj == nullptr) {
        r.push_back({"unknown_object", cmd.object_id.value_or("<none>") + " is not in the scene"});
      } else if (held_by_robot(world, obj->id)) {
        r.push_back({"object_held", obj->id + " is in the robot's hand"});
      }
      return r;
    }
    case ActionKind::kCrouch:
    case ActionKind::kStand:
    case ActionKind::kObserve:
      return r;
    case ActionKind::kUndo:
    case ActionKind::kRedo:
    case ActionKind::kLoadState:
    case ActionKind::kSolveIK:
      r.push_back({"unsupported", std::string(to_string(cmd.kind)) +
                                      " is handled by the environment, not as a world step"});
      return r;
    default:
      validate_object_action(world, cmd, ctx, r);
      return r;
  }
}

std::pair<WorldState, StepResult> execute(const WorldState& world, const ActionCommand& cmd,
                                          const ExecContext& ctx) {
  WorldState next = world;
  StepResult res;
  PreconditionReport report = validate(world, cmd, ctx);
  bool environment_level = !report.empty() && report.front().code == "unsupported";
  if (environment_level) {
    res = precondition_failure(std::move(report));
    if (ctx.attach_feedback) res.feedback = load_state(next);
    return {std::move(next), std::move(res)};
  }
  if (!report.empty()) {
    res = precondition_failure(std::move(report));
  } else if (!is_object_dependent(cmd.kind)) {
    res = execute_motion(next, cmd);
  } else if (auto blocked = blocked_result(world, cmd)) {
    res = std::move(*blocked);
  } else {
    MotionPlan plan = plan_motion(world, reaches_for(world, cmd), ctx,
                                  cmd.kind == ActionKind::kLift);
    if (plan.failure) {
      res = precondition_failure({*plan.failure});
    } else {
      res = draw_and_apply(next, cmd, ctx, plan);
    }
  }
  apply_effect_in_place(next, effect::AdvanceStep{});
  if (ctx.attach_feedback) {
    res.feedback = cmd.kind == ActionKind::kObserve ? observe(next) : load_state(next);
  }
  return {std::move(next), std::move(res)};
}

std::pair<WorldState, std::pair<StepResult, StepResult>> execute_parallel(
    const WorldState& world, const ActionCommand& left, const ActionCommand& right,
    const ExecContext& ctx) {
  WorldState next = world;
  StepResult lres;
  StepResult rres;
  auto well_formed = [](const ActionCommand& c, ArmSide side) {
    return is_object_dependent(c.kind) && c.kind != ActionKind::kLift && c.arm == side;
  };
  PreconditionReport lrep;
  PreconditionReport rrep;
  if (!well_formed(left, ArmSide::kLeft)) {
    lrep.push_back({"bad_parallel", "left command must be an object action for the left arm"});
  }
  if (!well_formed(right, ArmSide::kRight)) {
    rrep.push_back({"bad_parallel", "right command must be an object action for the right arm"});
  }
  if (lrep.empty()) lrep = validate(world, left, ctx);
  if (rrep.empty()) rrep = validate(world, right, ctx);
  bool conflict = left.object_id && right.object_id && *left.object_id == *right.object_id;

  std::optional<StepResult> lfixed;
  std::optional<StepResult> rfixed;
  if (!lrep.empty()) lfixed = precondition_failure(lrep);
  if (conflict) {
    StepResult c;
    c.success = false;
    c.outcome = "conflict";
    c.error_message = "conflict: " + *right.object_id + " is already the left arm's target";
    c.violations.push_back({"conflict", *c.error_message});
    c.message = *c.error_message;
    rfixed = c;
  } else if (!rrep.empty()) {
    rfixed = precondition_failure(rrep);
  }
  if (!lfixed) lfixed = blocked_result(world, left);
  if (!rfixed) rfixed = blocked_result(world, right);

  std::vector<Reach> reaches;
  if (!lfixed) reaches.push_back(reaches_for(world, left).front());
  if (!rfixed) reaches.push_back(reaches_for(world, right).front());
  MotionPlan plan;
  if (!reaches.empty()) {
    plan = plan_motion(world, reaches, ctx, reaches.size() == 2);
    if (plan.failure) {
      if (!lfixed) lfixed = precondition_failure({*plan.failure});
      if (!rfixed) rfixed = precondition_failure({*plan.failure});
    }
  }

  auto joints_for = [&](ArmSide side) {
    MotionPlan p;
    p.trajectory_len = plan.trajectory_len;
    for (const auto& j : plan.joints) {
      if (j.side == side) p.joints.push_back(j);
    }
    return p;
  };
  lres = lfixed ? *lfixed : draw_and_apply(next, left, ctx, joints_for(ArmSide::kLeft));
  if (rfixed) {
    rres = *rfixed;
  } else {
    // The left effects may already have changed the right target.
    WorldState attempt = next;
    try {
      rres = draw_and_apply(attempt, right, ctx, joints_for(ArmSide::kRight));
      next = std::move(attempt);
    } catch (const Error& e) {
      rres = StepResult{};
      rres.outcome = "conflict";
      rres.error_message = std::string("conflict: ") + e.what();
      rres.violations.push_back({"conflict", e.what()});
      rres.message = *rres.error_message;
    }
  }
  apply_effect_in_place(next, effect::AdvanceStep{});
  if (ctx.attach_feedback) {
    lres.feedback = load_state(next);
    rres.feedback = lres.feedback;
  }
  return {std::move(next), {std::move(lres), std::move(rres)}};
}

std::pair<WorldState, std::string> apply_outcome(const WorldState& world,
                                                 const ActionCommand& cmd,
                                                 const std::string& outcome_name,
                                                 const ExecContext& ctx) {
  WorldState next = world;
  if (!cmd.object_id) throw UnknownEntity("command has no object");
  std::string msg = apply_outcome_in_place(next, cmd, outcome_name, ctx);
  return {std::move(next), std::move(msg)};
}

Heading facing(int from_x, int from_y, int to_x, int to_y) {
  int dx = to_x - from_x;
  int dy = to_y - from_y;
  if (std::abs(dx) >= std::abs(dy) && dx != 0) return dx > 0 ? Heading::kE : Heading::kW;
  return dy >= 0 ? Heading::kN : Heading::kS;
}

std::pair<int, int> teleport_cell(const WorldState& world, const std::string& object_id) {
  const ObjectInstance& obj = world.object(object_id);
  // Already in (x, y) order.
  const std::pair<int, int> candidates[] = {
      {obj.x - 1, obj.y}, {obj.x, obj.y - 1}, {obj.x, obj.y + 1}, {obj.x + 1, obj.y}};
  for (const auto& [x, y] : candidates) {
    if (cell_free(world, x, y)) return {x, y};
  }
  throw NoFreeAdjacentCell("no free cell next to " + object_id);
}

json load_state(const WorldState& world) {
  json j;
  j["robot"] = to_json(world.robot);
  j["objects"] = json::object();
  for (const auto& [id, o] : world.objects) j["objects"][id] = to_json(o);
  j["step_count"] = world.step_count;
  return j;
}

json observe(const WorldState& world) {
  json j;
  j["robot"] = to_json(world.robot);
  j["objects"] = json::object();
  for (const auto& [id, o] : world.objects) {
    auto [forward, left] = robot_frame_offset(world.robot, o.x, o.y);
    if (forward <= 0.0) continue;
    double bearing = std::atan2(left, forward) * 180.0 / std::numbers::pi;
    if (std::abs(bearing) <= 45.0 + 1e-9) j["objects"][id] = to_json(o);
  }
  j["step_count"] = world.step_count;
  return j;
}

bool is_running_source(const ObjectInstance& object) {
  if (!object.intact || !object.flag(StateFlag::kIsToggledOn)) return false;
  return object.type == ObjectType::kCoffeeMachine ||
         (object.type == ObjectType::kFaucet && !object.springs_shut);
}

}  // namespace dualhab
