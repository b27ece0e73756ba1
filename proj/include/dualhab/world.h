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

// Scene, object and robot data model plus the single mutation primitive
// (`apply_effect`). A WorldState is a plain value: copies are independent and
// two equal states serialize to identical bytes.

#ifndef DUALHAB_WORLD_H_
#define DUALHAB_WORLD_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dualhab/catalog.h"
#include "dualhab/kinematics.h"
#include "dualhab/rng.h"
#include "json.hpp"

namespace dualhab {

inline constexpr int kSceneSchemaVersion = 1;

struct ObjectSpec {
  std::string id;
  ObjectType type = ObjectType::kPlant;
  int x = 0;
  int y = 0;
  HeightBand band = HeightBand::kCounter;
  std::map<StateFlag, bool> flags;
  // Openable receptacles and faucets only: the fixture closes (or stops
  // running) as soon as no arm holds it.
  bool springs_shut = false;
  std::vector<std::string> contains;

  friend bool operator==(const ObjectSpec&, const ObjectSpec&) = default;
};

struct SceneSpec {
  int schema_version = kSceneSchemaVersion;
  std::string scene_id;
  RoomKind room_kind = RoomKind::kKitchen;
  int width = 0;
  int height = 0;
  std::vector<ObjectSpec> objects;
  int start_x = 0;
  int start_y = 0;
  Heading start_heading = Heading::kN;

  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

struct ObjectInstance {
  std::string id;
  ObjectType type = ObjectType::kPlant;
  int x = 0;
  int y = 0;
  HeightBand band = HeightBand::kCounter;
  // Only flags licensed by the type are present.
  std::map<StateFlag, bool> flags;
  bool intact = true;
  bool spilled = false;
  bool springs_shut = false;
  std::vector<std::string> contains;  // sorted
  // Persistent per-action blocks left by "locked"/"stuck" outcomes.
  std::map<ActionKind, std::string> blocked;
  int use_count = 0;

  bool flag(StateFlag f) const {
    auto it = flags.find(f);
    return it != flags.end() && it->second;
  }
  bool licenses(StateFlag f) const { return flags.count(f) != 0; }

  friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

struct ArmState {
  ArmSide side = ArmSide::kLeft;
  std::optional<std::string> held;
  // Fixture the arm keeps open or running (sprung container, momentary tap).
  std::optional<std::string> engaged;
  JointVector joints;
  bool busy = false;

  bool free() const { return !held && !engaged; }

  friend bool operator==(const ArmState&, const ArmState&) = default;
};

struct RobotState {
  RobotProfile profile = RobotProfile::kX1;
  int x = 0;
  int y = 0;
  Heading heading = Heading::kN;
  Posture posture = Posture::kStand;
  ArmState left{ArmSide::kLeft, {}, {}, {}, false};
  ArmState right{ArmSide::kRight, {}, {}, {}, false};
  double reach_radius = 1.0;

  const ArmState& arm(ArmSide side) const {
    return side == ArmSide::kLeft ? left : right;
  }
  ArmState& arm(ArmSide side) {
    return side == ArmSide::kLeft ? left : right;
  }

  friend bool operator==(const RobotState&, const RobotState&) = default;
};

struct WorldState {
  std::string scene_id;
  RoomKind room_kind = RoomKind::kKitchen;
  int width = 0;
  int height = 0;
  std::map<std::string, ObjectInstance> objects;
  RobotState robot;
  std::uint64_t step_count = 0;
  StreamRng rng;

  const ObjectInstance& object(const std::string& id) const;
  const ObjectInstance* find(const std::string& id) const;

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

// ---------------------------------------------------------------------------
// Scene documents.

SceneSpec parse_scene(const nlohmann::json& doc);
SceneSpec load_scene_file(const std::filesystem::path& path);
nlohmann::json scene_to_json(const SceneSpec& spec);

// All *.json scene documents in `dir`, ordered by scene_id.
std::vector<SceneSpec> load_scene_dir(const std::filesystem::path& dir);

// Builds the initial state. Throws PlacementError for bad geometry and
// SchemaError for unlicensed flags or dangling container references.
WorldState load_scene(const SceneSpec& spec,
                      const RobotConfig& robot = default_robot_config(RobotProfile::kX1),
                      std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Serialization. Keys are emitted in sorted order, so equal states give
// equal bytes.

nlohmann::json to_json(const WorldState& world);
WorldState world_from_json(const nlohmann::json& doc);
std::string serialize(const WorldState& world);

nlohmann::json to_json(const ObjectInstance& object);
nlohmann::json to_json(const RobotState& robot);

// ---------------------------------------------------------------------------
// Queries.

using ObjectPredicate =
    std::function<bool(const WorldState&, const ObjectInstance&)>;

namespace filter {
ObjectPredicate of_type(ObjectType type);
ObjectPredicate actionable(Actionable a);
ObjectPredicate flag_is(StateFlag flag, bool value);
ObjectPredicate intact();
// Reachable by at least one arm from the robot's current cell and posture.
ObjectPredicate within_reach();
ObjectPredicate all_of(std::vector<ObjectPredicate> parts);
}  // namespace filter

// Matching objects ordered by object_id.
std::vector<const ObjectInstance*> query_objects(const WorldState& world,
                                                 const ObjectPredicate& pred);

// Arm holding `id`, if any (the left arm for lifted objects).
std::optional<ArmSide> holder_of(const WorldState& world, const std::string& id);
bool held_by_robot(const WorldState& world, const std::string& id);
// Container listing `id` in its contents.
const ObjectInstance* container_of(const WorldState& world, const std::string& id);
// Object physically standing on the floor grid: intact, not held, not inside
// a container. Only standing objects occupy cells.
bool is_standing(const WorldState& world, const ObjectInstance& object);
bool in_grid(const WorldState& world, int x, int y);
// In the grid and not occupied by any standing object.
bool cell_free(const WorldState& world, int x, int y);

// Unit step for a heading and for relative directions.
std::pair<int, int> heading_vector(Heading heading);
Heading rotate_heading(Heading heading, int quarter_turns_ccw);

// Invariant violations for property tests; empty when the state is sound.
std::vector<std::string> check_invariants(const WorldState& world);

// ---------------------------------------------------------------------------
// Effects: the only way to change a WorldState.

enum class Direction { kAhead, kBack, kLeft, kRight };

namespace effect {
struct SetFlag { std::string object; StateFlag flag; bool value; };
struct MarkBroken { std::string object; };
struct MarkSpilled { std::string object; };
struct MoveRobot { Direction direction; int cells; };
struct RotateRobot { int quarter_turns_ccw; };
struct PlaceRobot { int x; int y; Heading heading; };
struct SetPosture { Posture posture; };
struct Grasp { ArmSide side; std::string object; };
struct GraspBoth { std::string object; };
struct PutInto { ArmSide side; std::string object; std::string container; };
struct Engage { ArmSide side; std::string object; };
struct Disengage { ArmSide side; };
struct Block { std::string object; ActionKind action; std::string outcome; };
struct SetJoints { ArmSide side; std::vector<double> angles; };
struct CountUse { std::string object; };
struct AdvanceStep {};
}  // namespace effect

using Effect = std::variant<effect::SetFlag, effect::MarkBroken, effect::MarkSpilled,
                            effect::MoveRobot, effect::RotateRobot, effect::PlaceRobot,
                            effect::SetPosture, effect::Grasp, effect::GraspBoth,
                            effect::PutInto, effect::Engage, effect::Disengage,
                            effect::Block, effect::SetJoints, effect::CountUse,
                            effect::AdvanceStep>;

// Returns a new state with the effect applied; `world` is untouched.
// Throws UnknownEntity when the effect names a missing object, and
// PlacementError when it would move the robot off the grid.
WorldState apply_effect(const WorldState& world, const Effect& effect);

// In-place variant used by the action pipeline once it owns a copy.
void apply_effect_in_place(WorldState& world, const Effect& effect);

}  // namespace dualhab

#endif  // DUALHAB_WORLD_H_
