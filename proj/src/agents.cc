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

#include "dualhab/agents.h"

#include <algorithm>
#include <initializer_list>

#include "dualhab/error.h"

namespace dualhab {
namespace {

using AK = ActionKind;
using SF = StateFlag;

// Raised inside the planner when the task cannot be advanced.
struct Stuck {};

using Next = std::optional<AgentAction>;

ActionCommand object_cmd(AK kind, std::optional<ArmSide> arm, const std::string& id) {
  ActionCommand c;
  c.kind = kind;
  c.arm = arm;
  c.object_id = id;
  return c;
}

ActionCommand plain_cmd(AK kind) {
  ActionCommand c;
  c.kind = kind;
  return c;
}

bool inside(const WorldState& w, const std::string& obj, const std::string& container) {
  const ObjectInstance& c = w.object(container);
  return std::binary_search(c.contains.begin(), c.contains.end(), obj);
}

bool reach(const RobotState& r, std::initializer_list<ArmSide> arms, const ObjectInstance& o) {
  for (ArmSide a : arms) {
    if (!check_reachable(r, a, o)) return false;
  }
  return true;
}

// Next command that brings `obj` within reach of every arm in `arms`, or
// nullopt when it already is. Robot motion releases engaged fixtures, so
// callers must approach before engaging.
Next approach(const WorldState& w, const ObjectInstance& obj, std::initializer_list<ArmSide> arms) {
  if (reach(w.robot, arms, obj)) return std::nullopt;
  RobotState flipped = w.robot;
  flipped.posture = w.robot.posture == Posture::kStand ? Posture::kCrouch : Posture::kStand;
  if (reach(flipped, arms, obj)) {
    return plain_cmd(flipped.posture == Posture::kCrouch ? AK::kCrouch : AK::kStand);
  }
  std::pair<int, int> cell;
  try {
    cell = teleport_cell(w, obj.id);
  } catch (const NoFreeAdjacentCell&) {
    throw Stuck{};
  }
  RobotState there = w.robot;
  there.x = cell.first;
  there.y = cell.second;
  there.heading = facing(cell.first, cell.second, obj.x, obj.y);
  RobotState there_flipped = there;
  there_flipped.posture = flipped.posture;
  if (there == w.robot || (!reach(there, arms, obj) && !reach(there_flipped, arms, obj))) {
    throw Stuck{};
  }
  return object_cmd(AK::kTeleport, std::nullopt, obj.id);
}

std::optional<ArmSide> free_arm(const WorldState& w, ArmSide preferred) {
  if (w.robot.arm(preferred).free()) return preferred;
  if (w.robot.arm(other(preferred)).free()) return other(preferred);
  return std::nullopt;
}

ArmSide need_free_arm(const WorldState& w, ArmSide preferred) {
  auto a = free_arm(w, preferred);
  if (!a) throw Stuck{};
  return *a;
}

bool blocked(const ObjectInstance& o, AK kind) { return o.blocked.count(kind) != 0; }

// Gets `id` into some hand, preferring `arm`. nullopt once held.
Next acquire(const WorldState& w, const std::string& id, ArmSide arm) {
  if (held_by_robot(w, id)) return std::nullopt;
  const ObjectInstance& obj = w.object(id);
  if (blocked(obj, AK::kPick)) throw Stuck{};
  const ArmSide hand = need_free_arm(w, arm);
  if (const ObjectInstance* c = container_of(w, id);
      c != nullptr && c->licenses(SF::kIsOpen) && !c->flag(SF::kIsOpen)) {
    if (blocked(*c, AK::kOpen)) throw Stuck{};
    if (c->springs_shut) {
      const ArmSide opener = other(hand);
      if (!w.robot.arm(opener).free()) throw Stuck{};
      if (Next n = approach(w, *c, {hand, opener})) return n;
      return object_cmd(AK::kOpen, opener, c->id);
    }
    if (Next n = approach(w, *c, {hand})) return n;
    return object_cmd(AK::kOpen, hand, c->id);
  }
  if (Next n = approach(w, obj, {hand})) return n;
  return object_cmd(AK::kPick, hand, id);
}

// Puts `id` into the (non-sprung) container `cid`. nullopt once inside.
Next deliver(const WorldState& w, const std::string& id, const std::string& cid, ArmSide arm) {
  if (inside(w, id, cid)) return std::nullopt;
  const ObjectInstance& c = w.object(cid);
  if (c.licenses(SF::kIsOpen) && !c.flag(SF::kIsOpen)) {
    if (blocked(c, AK::kOpen) || c.springs_shut) throw Stuck{};
    auto holder = holder_of(w, id);
    const ArmSide opener = need_free_arm(w, holder ? other(*holder) : arm);
    if (Next n = approach(w, c, {opener})) return n;
    return object_cmd(AK::kOpen, opener, cid);
  }
  if (Next n = acquire(w, id, arm)) return n;
  const ArmSide hand = *holder_of(w, id);
  if (Next n = approach(w, c, {hand})) return n;
  ActionCommand place = object_cmd(AK::kPlace, hand, id);
  place.container_id = cid;
  return place;
}

Next act_on(const WorldState& w, AK kind, const std::string& id, SF goal_flag) {
  const ObjectInstance& obj = w.object(id);
  if (obj.flag(goal_flag)) return std::nullopt;
  if (blocked(obj, kind)) throw Stuck{};
  const ArmSide hand = need_free_arm(w, ArmSide::kLeft);
  if (Next n = approach(w, obj, {hand})) return n;
  return object_cmd(kind, hand, id);
}

Next plan_fill_at_tap(const WorldState& w, const std::string& cont, const std::string& tap) {
  if (Next n = acquire(w, cont, ArmSide::kLeft)) return n;
  const ArmSide hand = *holder_of(w, cont);
  const ObjectInstance& t = w.object(tap);
  if (t.flag(SF::kIsToggledOn)) {
    if (reach(w.robot, {ArmSide::kLeft}, t) || reach(w.robot, {ArmSide::kRight}, t)) {
      return object_cmd(AK::kFill, hand, cont);
    }
  }
  if (blocked(t, AK::kToggle)) throw Stuck{};
  const ArmSide toggler = other(hand);
  if (!w.robot.arm(toggler).free()) throw Stuck{};
  if (Next n = approach(w, t, {toggler})) return n;
  if (t.flag(SF::kIsToggledOn)) return object_cmd(AK::kFill, hand, cont);
  return object_cmd(AK::kToggle, toggler, tap);
}

Next plan(const WorldState& w, const TaskInstance& task, const SlotAssignment& s,
          bool allow_parallel) {
  const std::string& name = task.template_name;
  if (name == "pick_objects") return acquire(w, s.at("object"), ArmSide::kLeft);
  if (name == "toggle_objects") return act_on(w, AK::kToggle, s.at("object"), SF::kIsToggledOn);
  if (name == "open_objects") return act_on(w, AK::kOpen, s.at("object"), SF::kIsOpen);
  if (name == "use_up_objects") return act_on(w, AK::kUse, s.at("object"), SF::kIsUsedUp);
  if (name == "cook_objects") return act_on(w, AK::kCook, s.at("object"), SF::kIsCooked);
  if (name == "fill_objects") return plan_fill_at_tap(w, s.at("container"), s.at("source"));

  if (name == "slice_objects" || name == "pick_and_slice") {
    const std::string& id = s.at("object");
    const ObjectInstance& obj = w.object(id);
    if (!obj.flag(SF::kIsSliced)) {
      if (blocked(obj, AK::kSlice)) throw Stuck{};
      if (Next n = acquire(w, s.at("knife"), ArmSide::kLeft)) return n;
      const ArmSide hand = *holder_of(w, s.at("knife"));
      if (Next n = approach(w, obj, {hand})) return n;
      return object_cmd(AK::kSlice, hand, id);
    }
    return acquire(w, id, ArmSide::kRight);
  }

  if (name == "place_different") {
    if (Next n = deliver(w, s.at("object_a"), s.at("container_a"), ArmSide::kLeft)) return n;
    return deliver(w, s.at("object_b"), s.at("container_b"), ArmSide::kLeft);
  }
  if (name == "place_same") {
    if (Next n = deliver(w, s.at("object_a"), s.at("container"), ArmSide::kLeft)) return n;
    return deliver(w, s.at("object_b"), s.at("container"), ArmSide::kLeft);
  }
  if (name == "open_place") {
    const std::string& cid = s.at("container");
    if (Next n = act_on(w, AK::kOpen, cid, SF::kIsOpen)) return n;
    return deliver(w, s.at("object"), cid, ArmSide::kLeft);
  }

  if (name == "pick_filled") {
    const std::string& cont = s.at("container");
    const std::string& machine = s.at("machine");
    if (w.object(cont).flag(SF::kIsFilled)) return acquire(w, cont, ArmSide::kLeft);
    if (Next n = deliver(w, cont, machine, ArmSide::kLeft)) return n;
    const ObjectInstance& m = w.object(machine);
    if (!m.flag(SF::kIsToggledOn)) return act_on(w, AK::kToggle, machine, SF::kIsToggledOn);
    const ArmSide hand = need_free_arm(w, ArmSide::kLeft);
    if (Next n = approach(w, w.object(cont), {hand})) return n;
    return object_cmd(AK::kFill, hand, cont);
  }

  if (name == "lift_objects") {
    const ObjectInstance& obj = w.object(s.at("object"));
    if (obj.flag(SF::kIsLifted)) return std::nullopt;
    if (blocked(obj, AK::kLift) || !w.robot.left.free() || !w.robot.right.free()) throw Stuck{};
    if (Next n = approach(w, obj, {ArmSide::kLeft, ArmSide::kRight})) return n;
    return object_cmd(AK::kLift, std::nullopt, obj.id);
  }

  if (name == "affordance_place") {
    const std::string& id = s.at("object");
    const ObjectInstance& c = w.object(s.at("container"));
    if (inside(w, id, c.id)) return std::nullopt;
    if (blocked(c, AK::kOpen)) throw Stuck{};
    if (!held_by_robot(w, id)) {
      const ObjectInstance& obj = w.object(id);
      if (allow_parallel && !c.flag(SF::kIsOpen) && w.robot.left.free() && w.robot.right.free() &&
          reach(w.robot, {ArmSide::kLeft}, obj) && reach(w.robot, {ArmSide::kRight}, c) &&
          !blocked(obj, AK::kPick)) {
        return ParallelCommand{object_cmd(AK::kPick, ArmSide::kLeft, id),
                               object_cmd(AK::kOpen, ArmSide::kRight, c.id)};
      }
      return acquire(w, id, ArmSide::kLeft);
    }
    const ArmSide hand = *holder_of(w, id);
    const ArmSide opener = other(hand);
    if (!c.flag(SF::kIsOpen)) {
      if (!w.robot.arm(opener).free()) throw Stuck{};
      if (Next n = approach(w, c, {hand, opener})) return n;
      return object_cmd(AK::kOpen, opener, c.id);
    }
    if (Next n = approach(w, c, {hand})) return n;
    ActionCommand place = object_cmd(AK::kPlace, hand, id);
    place.container_id = c.id;
    return place;
  }

  if (name == "hold_filled") {
    const std::string& cont = s.at("container");
    const ObjectInstance& tap = w.object(s.at("source"));
    if (!held_by_robot(w, cont)) {
      const ObjectInstance& obj = w.object(cont);
      if (allow_parallel && !obj.flag(SF::kIsFilled) && !tap.flag(SF::kIsToggledOn) &&
          w.robot.left.free() &&
          w.robot.right.free() && reach(w.robot, {ArmSide::kLeft}, obj) &&
          reach(w.robot, {ArmSide::kRight}, tap) && !blocked(tap, AK::kToggle) &&
          !blocked(obj, AK::kPick)) {
        return ParallelCommand{object_cmd(AK::kPick, ArmSide::kLeft, cont),
                               object_cmd(AK::kToggle, ArmSide::kRight, tap.id)};
      }
      return acquire(w, cont, ArmSide::kLeft);
    }
    if (w.object(cont).flag(SF::kIsFilled)) return std::nullopt;
    return plan_fill_at_tap(w, cont, tap.id);
  }
  throw UnknownEntity("greedy agent has no plan for " + name);
}

}  // namespace

std::optional<AgentAction> GreedyAgent::act(const WorldState& world, const TaskInstance& task) {
  auto slots = resolve_bindings(world, task);
  if (!slots || goal_holds(world, task, *slots)) return std::nullopt;
  try {
    // A parallel attempt that fails (balance, a bad draw) is not repeated.
    Next next = plan(world, task, *slots, !tried_parallel_);
    if (next && std::holds_alternative<ParallelCommand>(*next)) tried_parallel_ = true;
    return next;
  } catch (const Stuck&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------

void RandomAgent::begin(const TaskInstance&, std::uint64_t seed) {
  // Separate stream from the engine's outcome draws.
  rng_ = StreamRng(seed ^ 0x9e3779b97f4a7c15ULL, 0);
}

std::optional<AgentAction> RandomAgent::act(const WorldState& world, const TaskInstance&) {
  static constexpr AK kKinds[] = {
      AK::kMoveAhead, AK::kMoveBack, AK::kMoveLeft, AK::kMoveRight, AK::kRotateLeft,
      AK::kRotateRight, AK::kTeleport, AK::kCrouch, AK::kStand, AK::kPick,
      AK::kLift, AK::kPlace, AK::kToggle, AK::kOpen, AK::kFill, AK::kSlice,
      AK::kCook, AK::kUse};
  std::vector<const std::string*> ids;
  for (const auto& [id, o] : world.objects) ids.push_back(&id);
  auto pick_id = [&]() -> const std::string& { return *ids[rng_.below(ids.size())]; };

  ActionCommand cmd;
  cmd.kind = kKinds[rng_.below(std::size(kKinds))];
  switch (cmd.kind) {
    case AK::kMoveAhead:
    case AK::kMoveBack:
    case AK::kMoveLeft:
    case AK::kMoveRight:
    case AK::kRotateLeft:
    case AK::kRotateRight:
      cmd.magnitude = 1;
      break;
    case AK::kCrouch:
    case AK::kStand:
      break;
    case AK::kTeleport:
    case AK::kLift:
      cmd.object_id = pick_id();
      break;
    case AK::kPlace:
      cmd.arm = rng_.below(2) == 0 ? ArmSide::kLeft : ArmSide::kRight;
      cmd.object_id = world.robot.arm(*cmd.arm).held.value_or(pick_id());
      cmd.container_id = pick_id();
      break;
    default:
      cmd.arm = rng_.below(2) == 0 ? ArmSide::kLeft : ArmSide::kRight;
      cmd.object_id = pick_id();
      break;
  }
  return cmd;
}

std::unique_ptr<Agent> make_agent(std::string_view name) {
  if (iequals(name, "greedy")) return std::make_unique<GreedyAgent>();
  if (iequals(name, "random")) return std::make_unique<RandomAgent>();
  throw UnknownEntity("unknown agent '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

EpisodeReport run_episode(const SceneSpec& scene, const TaskInstance& task, Agent& agent,
                          const EnvConfig& config, std::uint64_t seed, int max_steps,
                          bool keep_transcript) {
  Environment env(scene, config, seed, task);
  agent.begin(task, seed);

  EpisodeReport rep;
  rep.task_id = task.task_id;
  rep.template_name = task.template_name;
  rep.category = classify(task);
  rep.scene_id = task.scene_id;
  rep.agent = agent.name();
  rep.robot = config.exec.robot.profile;
  rep.difficulty = to_string(config.exec.difficulty);
  rep.seed = seed;
  rep.max_steps = max_steps;

  TaskStatus status = evaluate(env.world(), task);
  while (status == TaskStatus::kInProgress &&
         env.world().step_count < static_cast<std::uint64_t>(max_steps)) {
    std::optional<AgentAction> action = agent.act(env.world(), task);
    if (!action) {
      rep.gave_up = true;
      break;
    }
    EpisodeStep entry;
    if (const auto* single = std::get_if<ActionCommand>(&*action)) {
      StepResult r = env.step(*single);
      if (keep_transcript) {
        entry.commands.push_back(to_text(*single));
        entry.outcomes.push_back(r.outcome);
        entry.success.push_back(r.success);
      }
    } else {
      const auto& [l, r] = std::get<ParallelCommand>(*action);
      auto [lr, rr] = env.step_parallel(l, r);
      if (keep_transcript) {
        entry.commands = {to_text(l), to_text(r)};
        entry.outcomes = {lr.outcome, rr.outcome};
        entry.success = {lr.success, rr.success};
      }
    }
    entry.step = env.world().step_count;
    if (keep_transcript) rep.transcript.push_back(std::move(entry));
    status = evaluate(env.world(), task);
  }
  rep.status = status;
  rep.steps = static_cast<int>(env.world().step_count);
  if (keep_transcript) rep.final_state = serialize(env.world());
  return rep;
}

nlohmann::json to_json(const EpisodeReport& r) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : r.transcript) {
    nlohmann::json e;
    e["step"] = s.step;
    e["commands"] = s.commands;
    e["outcomes"] = s.outcomes;
    e["success"] = s.success;
    steps.push_back(std::move(e));
  }
  return {{"task_id", r.task_id},
          {"template", r.template_name},
          {"category", std::string(to_string(r.category))},
          {"scene_id", r.scene_id},
          {"agent", r.agent},
          {"robot", std::string(to_string(r.robot))},
          {"difficulty", r.difficulty},
          {"seed", r.seed},
          {"max_steps", r.max_steps},
          {"status", std::string(to_string(r.status))},
          {"steps", r.steps},
          {"gave_up", r.gave_up},
          {"transcript", steps}};
}

}  // namespace dualhab
