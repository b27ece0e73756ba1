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

#include "dualhab/world.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "dualhab/error.h"

namespace dualhab {
namespace {

using nlohmann::json;

void check_keys(const json& doc, const std::string& where,
                std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional = {}) {
  if (!doc.is_object()) throw SchemaError(where + ": expected an object");
  for (const char* key : required) {
    if (!doc.contains(key)) throw SchemaError(where + ": missing field '" + key + "'");
  }
  for (const auto& [key, value] : doc.items()) {
    bool known = std::any_of(required.begin(), required.end(),
                             [&](const char* k) { return key == k; }) ||
                 std::any_of(optional.begin(), optional.end(),
                             [&](const char* k) { return key == k; });
    if (!known) throw SchemaError(where + ": unknown field '" + key + "'");
  }
}

int get_int(const json& doc, const char* key, const std::string& where) {
  const json& v = doc.at(key);
  if (!v.is_number_integer()) throw SchemaError(where + ": '" + key + "' must be an integer");
  return v.get<int>();
}

std::string get_string(const json& doc, const char* key, const std::string& where) {
  const json& v = doc.at(key);
  if (!v.is_string()) throw SchemaError(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

template <typename T>
T parse_enum(std::optional<T> parsed, const std::string& text, const std::string& where) {
  if (!parsed) throw SchemaError(where + ": unknown value '" + text + "'");
  return *parsed;
}

ObjectInstance& mutable_object(WorldState& world, const std::string& id) {
  auto it = world.objects.find(id);
  if (it == world.objects.end()) throw UnknownEntity("no object '" + id + "'");
  return it->second;
}

void detach_from_container(WorldState& world, const std::string& id) {
  for (auto& [cid, container] : world.objects) {
    auto& c = container.contains;
    c.erase(std::remove(c.begin(), c.end(), id), c.end());
  }
}

void set_flag_if_licensed(ObjectInstance& object, StateFlag flag, bool value) {
  if (object.licenses(flag)) object.flags[flag] = value;
}

void carry_held_objects(WorldState& world) {
  for (ArmSide side : {ArmSide::kLeft, ArmSide::kRight}) {
    const ArmState& arm = world.robot.arm(side);
    if (!arm.held) continue;
    ObjectInstance& object = mutable_object(world, *arm.held);
    object.x = world.robot.x;
    object.y = world.robot.y;
    object.band = HeightBand::kCounter;
  }
}

std::pair<int, int> direction_vector(Heading heading, Direction direction) {
  switch (direction) {
    case Direction::kAhead: return heading_vector(heading);
    case Direction::kBack: return heading_vector(rotate_heading(heading, 2));
    case Direction::kLeft: return heading_vector(rotate_heading(heading, 1));
    case Direction::kRight: return heading_vector(rotate_heading(heading, -1));
  }
  return {0, 0};
}

void place_robot(WorldState& world, int x, int y) {
  if (!in_grid(world, x, y)) {
    throw PlacementError("robot cell (" + std::to_string(x) + "," + std::to_string(y) +
                         ") outside the grid");
  }
  if (!cell_free(world, x, y)) {
    throw PlacementError("robot cell (" + std::to_string(x) + "," + std::to_string(y) +
                         ") is occupied");
  }
  world.robot.x = x;
  world.robot.y = y;
  carry_held_objects(world);
}

json arm_to_json(const ArmState& arm) {
  json j;
  j["held"] = arm.held ? json(*arm.held) : json(nullptr);
  j["engaged"] = arm.engaged ? json(*arm.engaged) : json(nullptr);
  j["joints"] = arm.joints.angles;
  j["velocities"] = arm.joints.velocities;
  j["busy"] = arm.busy;
  return j;
}

ArmState arm_from_json(const json& j, ArmSide side) {
  ArmState arm;
  arm.side = side;
  if (!j.at("held").is_null()) arm.held = j.at("held").get<std::string>();
  if (!j.at("engaged").is_null()) arm.engaged = j.at("engaged").get<std::string>();
  arm.joints.angles = j.at("joints").get<std::vector<double>>();
  arm.joints.velocities = j.at("velocities").get<std::vector<double>>();
  arm.busy = j.at("busy").get<bool>();
  return arm;
}

}  // namespace

const ObjectInstance& WorldState::object(const std::string& id) const {
  auto it = objects.find(id);
  if (it == objects.end()) throw UnknownEntity("no object '" + id + "'");
  return it->second;
}

const ObjectInstance* WorldState::find(const std::string& id) const {
  auto it = objects.find(id);
  return it == objects.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Scene documents.

SceneSpec parse_scene(const json& doc) {
  check_keys(doc, "scene",
             {"schema_version", "scene_id", "room_kind", "grid", "robot_start", "objects"});
  SceneSpec spec;
  spec.schema_version = get_int(doc, "schema_version", "scene");
  if (spec.schema_version != kSceneSchemaVersion) {
    throw SchemaError("scene: unsupported schema_version " +
                      std::to_string(spec.schema_version));
  }
  spec.scene_id = get_string(doc, "scene_id", "scene");
  std::string room = get_string(doc, "room_kind", "scene");
  spec.room_kind = parse_enum(parse_room_kind(room), room, "scene.room_kind");

  const json& grid = doc.at("grid");
  check_keys(grid, "scene.grid", {"w", "h"});
  spec.width = get_int(grid, "w", "scene.grid");
  spec.height = get_int(grid, "h", "scene.grid");
  if (spec.width <= 0 || spec.height <= 0) throw SchemaError("scene.grid: sizes must be positive");

  const json& start = doc.at("robot_start");
  check_keys(start, "scene.robot_start", {"x", "y", "heading"});
  spec.start_x = get_int(start, "x", "scene.robot_start");
  spec.start_y = get_int(start, "y", "scene.robot_start");
  std::string heading = get_string(start, "heading", "scene.robot_start");
  spec.start_heading = parse_enum(parse_heading(heading), heading, "scene.robot_start.heading");

  if (!doc.at("objects").is_array()) throw SchemaError("scene: 'objects' must be an array");
  for (const json& o : doc.at("objects")) {
    std::string where = "scene.objects";
    check_keys(o, where, {"id", "type", "x", "y", "band", "flags"}, {"springs_shut", "contains"});
    ObjectSpec obj;
    obj.id = get_string(o, "id", where);
    where += "[" + obj.id + "]";
    std::string type = get_string(o, "type", where);
    obj.type = parse_enum(parse_object_type(type), type, where + ".type");
    obj.x = get_int(o, "x", where);
    obj.y = get_int(o, "y", where);
    std::string band = get_string(o, "band", where);
    obj.band = parse_enum(parse_band(band), band, where + ".band");
    if (!o.at("flags").is_object()) throw SchemaError(where + ": 'flags' must be an object");
    for (const auto& [name, value] : o.at("flags").items()) {
      StateFlag flag = parse_enum(parse_flag(name), name, where + ".flags");
      if (!value.is_boolean()) throw SchemaError(where + ".flags." + name + " must be boolean");
      if (!flag_licensed(obj.type, flag)) {
        throw SchemaError(where + ": flag " + name + " not licensed for " + type);
      }
      obj.flags[flag] = value.get<bool>();
    }
    if (o.contains("springs_shut")) {
      if (!o.at("springs_shut").is_boolean()) {
        throw SchemaError(where + ": 'springs_shut' must be boolean");
      }
      obj.springs_shut = o.at("springs_shut").get<bool>();
    }
    if (o.contains("contains")) {
      if (!o.at("contains").is_array()) throw SchemaError(where + ": 'contains' must be an array");
      for (const json& c : o.at("contains")) {
        if (!c.is_string()) throw SchemaError(where + ": 'contains' entries must be strings");
        obj.contains.push_back(c.get<std::string>());
      }
    }
    spec.objects.push_back(std::move(obj));
  }
  return spec;
}

SceneSpec load_scene_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open scene file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return parse_scene(doc);
}

json scene_to_json(const SceneSpec& spec) {
  json doc;
  doc["schema_version"] = spec.schema_version;
  doc["scene_id"] = spec.scene_id;
  doc["room_kind"] = std::string(to_string(spec.room_kind));
  doc["grid"] = {{"w", spec.width}, {"h", spec.height}};
  doc["robot_start"] = {
      {"x", spec.start_x}, {"y", spec.start_y}, {"heading", std::string(to_string(spec.start_heading))}};
  json objects = json::array();
  for (const auto& o : spec.objects) {
    json j;
    j["id"] = o.id;
    j["type"] = std::string(to_string(o.type));
    j["x"] = o.x;
    j["y"] = o.y;
    j["band"] = std::string(to_string(o.band));
    j["flags"] = json::object();
    for (const auto& [flag, value] : o.flags) j["flags"][std::string(to_string(flag))] = value;
    if (o.springs_shut) j["springs_shut"] = true;
    if (!o.contains.empty()) j["contains"] = o.contains;
    objects.push_back(std::move(j));
  }
  doc["objects"] = std::move(objects);
  return doc;
}

std::vector<SceneSpec> load_scene_dir(const std::filesystem::path& dir) {
  std::vector<SceneSpec> scenes;
  if (!std::filesystem::is_directory(dir)) {
    throw SchemaError("scene directory " + dir.string() + " does not exist");
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") scenes.push_back(load_scene_file(entry.path()));
  }
  std::sort(scenes.begin(), scenes.end(),
            [](const SceneSpec& a, const SceneSpec& b) { return a.scene_id < b.scene_id; });
  return scenes;
}

WorldState load_scene(const SceneSpec& spec, const RobotConfig& robot, std::uint64_t seed) {
  if (spec.schema_version != kSceneSchemaVersion) {
    throw SchemaError("unsupported schema_version " + std::to_string(spec.schema_version));
  }
  if (spec.width <= 0 || spec.height <= 0) throw SchemaError("grid sizes must be positive");
  WorldState world;
  world.scene_id = spec.scene_id;
  world.room_kind = spec.room_kind;
  world.width = spec.width;
  world.height = spec.height;
  world.rng = StreamRng(seed, 0);

  for (const auto& o : spec.objects) {
    if (o.id.empty()) throw SchemaError("object with empty id");
    if (world.objects.count(o.id)) throw SchemaError("duplicate object id '" + o.id + "'");
    if (!in_grid(world, o.x, o.y)) {
      throw PlacementError("object " + o.id + " at (" + std::to_string(o.x) + "," +
                           std::to_string(o.y) + ") lies outside the grid");
    }
    ObjectInstance inst;
    inst.id = o.id;
    inst.type = o.type;
    inst.x = o.x;
    inst.y = o.y;
    inst.band = o.band;
    for (int f = 0; f < kNumStateFlags; ++f) {
      auto flag = static_cast<StateFlag>(f);
      if (flag_licensed(o.type, flag)) inst.flags[flag] = false;
    }
    for (const auto& [flag, value] : o.flags) {
      if (!flag_licensed(o.type, flag)) {
        throw SchemaError("flag " + std::string(to_string(flag)) + " not licensed for " + o.id);
      }
      if ((flag == StateFlag::kIsPickedUp || flag == StateFlag::kIsLifted) && value) {
        throw SchemaError(o.id + ": objects cannot start held");
      }
      inst.flags[flag] = value;
    }
    if (o.springs_shut) {
      bool openable = has_actionable(o.type, Actionable::kOpenable) && type_info(o.type).receptacle;
      if (!openable && o.type != ObjectType::kFaucet) {
        throw SchemaError(o.id + ": springs_shut applies to openable receptacles and faucets");
      }
      if (inst.flag(StateFlag::kIsOpen) || inst.flag(StateFlag::kIsToggledOn)) {
        throw SchemaError(o.id + ": a sprung fixture starts closed");
      }
    }
    inst.springs_shut = o.springs_shut;
    inst.contains = o.contains;
    std::sort(inst.contains.begin(), inst.contains.end());
    world.objects.emplace(o.id, std::move(inst));
  }

  std::set<std::string> contained;
  for (auto& [id, inst] : world.objects) {
    if (inst.contains.empty()) continue;
    if (!type_info(inst.type).receptacle) throw SchemaError(id + " is not a receptacle");
    for (const auto& cid : inst.contains) {
      auto it = world.objects.find(cid);
      if (it == world.objects.end()) throw SchemaError(id + " contains unknown object " + cid);
      if (cid == id || !contained.insert(cid).second) {
        throw SchemaError("object " + cid + " listed in more than one container");
      }
      if (!has_actionable(it->second.type, Actionable::kPickupable)) {
        throw SchemaError(id + " contains non-pickupable object " + cid);
      }
    }
  }
  for (const auto& cid : contained) {
    ObjectInstance& inner = world.objects.at(cid);
    if (!inner.contains.empty()) throw SchemaError("nested containers are not supported: " + cid);
    const ObjectInstance* outer = container_of(world, cid);
    inner.x = outer->x;
    inner.y = outer->y;
    inner.band = outer->band;
  }

  std::set<std::tuple<int, int, HeightBand>> occupied;
  for (const auto& [id, inst] : world.objects) {
    if (contained.count(id)) continue;
    if (!occupied.emplace(inst.x, inst.y, inst.band).second) {
      throw PlacementError("two objects share cell (" + std::to_string(inst.x) + "," +
                           std::to_string(inst.y) + ") at band " +
                           std::string(to_string(inst.band)));
    }
  }

  world.robot.profile = robot.profile;
  world.robot.reach_radius = robot.reach_radius;
  world.robot.heading = spec.start_heading;
  world.robot.left.joints.angles.assign(robot.left.n_joints(), 0.0);
  world.robot.right.joints.angles.assign(robot.right.n_joints(), 0.0);
  if (!in_grid(world, spec.start_x, spec.start_y)) {
    throw PlacementError("robot start outside the grid");
  }
  if (!cell_free(world, spec.start_x, spec.start_y)) {
    throw PlacementError("robot start cell is occupied");
  }
  world.robot.x = spec.start_x;
  world.robot.y = spec.start_y;
  return world;
}

// ---------------------------------------------------------------------------
// Serialization.

json to_json(const ObjectInstance& o) {
  json j;
  j["id"] = o.id;
  j["type"] = std::string(to_string(o.type));
  j["x"] = o.x;
  j["y"] = o.y;
  j["band"] = std::string(to_string(o.band));
  j["flags"] = json::object();
  for (const auto& [flag, value] : o.flags) j["flags"][std::string(to_string(flag))] = value;
  j["intact"] = o.intact;
  j["spilled"] = o.spilled;
  j["springs_shut"] = o.springs_shut;
  j["contains"] = o.contains;
  j["blocked"] = json::object();
  for (const auto& [action, outcome] : o.blocked) {
    j["blocked"][std::string(to_string(action))] = outcome;
  }
  j["use_count"] = o.use_count;
  return j;
}

json to_json(const RobotState& r) {
  json j;
  j["profile"] = std::string(to_string(r.profile));
  j["x"] = r.x;
  j["y"] = r.y;
  j["heading"] = std::string(to_string(r.heading));
  j["posture"] = std::string(to_string(r.posture));
  j["reach_radius"] = r.reach_radius;
  j["left"] = arm_to_json(r.left);
  j["right"] = arm_to_json(r.right);
  return j;
}

json to_json(const WorldState& world) {
  json j;
  j["scene_id"] = world.scene_id;
  j["room_kind"] = std::string(to_string(world.room_kind));
  j["grid"] = {{"w", world.width}, {"h", world.height}};
  j["objects"] = json::object();
  for (const auto& [id, o] : world.objects) j["objects"][id] = to_json(o);
  j["robot"] = to_json(world.robot);
  j["step_count"] = world.step_count;
  j["rng"] = {{"seed", world.rng.seed()}, {"position", world.rng.position()}};
  return j;
}

WorldState world_from_json(const json& doc) {
  try {
    WorldState world;
    world.scene_id = doc.at("scene_id").get<std::string>();
    std::string room = doc.at("room_kind").get<std::string>();
    world.room_kind = parse_enum(parse_room_kind(room), room, "state.room_kind");
    world.width = doc.at("grid").at("w").get<int>();
    world.height = doc.at("grid").at("h").get<int>();
    for (const auto& [id, o] : doc.at("objects").items()) {
      ObjectInstance inst;
      inst.id = o.at("id").get<std::string>();
      std::string type = o.at("type").get<std::string>();
      inst.type = parse_enum(parse_object_type(type), type, "state.objects.type");
      inst.x = o.at("x").get<int>();
      inst.y = o.at("y").get<int>();
      std::string band = o.at("band").get<std::string>();
      inst.band = parse_enum(parse_band(band), band, "state.objects.band");
      for (const auto& [name, value] : o.at("flags").items()) {
        inst.flags[parse_enum(parse_flag(name), name, "state.flags")] = value.get<bool>();
      }
      inst.intact = o.at("intact").get<bool>();
      inst.spilled = o.at("spilled").get<bool>();
      inst.springs_shut = o.at("springs_shut").get<bool>();
      inst.contains = o.at("contains").get<std::vector<std::string>>();
      for (const auto& [name, outcome] : o.at("blocked").items()) {
        inst.blocked[parse_enum(parse_action_kind(name), name, "state.blocked")] =
            outcome.get<std::string>();
      }
      inst.use_count = o.at("use_count").get<int>();
      world.objects.emplace(id, std::move(inst));
    }
    const json& r = doc.at("robot");
    std::string profile = r.at("profile").get<std::string>();
    world.robot.profile = parse_enum(parse_profile(profile), profile, "state.robot.profile");
    world.robot.x = r.at("x").get<int>();
    world.robot.y = r.at("y").get<int>();
    std::string heading = r.at("heading").get<std::string>();
    world.robot.heading = parse_enum(parse_heading(heading), heading, "state.robot.heading");
    std::string posture = r.at("posture").get<std::string>();
    world.robot.posture = parse_enum(parse_posture(posture), posture, "state.robot.posture");
    world.robot.reach_radius = r.at("reach_radius").get<double>();
    world.robot.left = arm_from_json(r.at("left"), ArmSide::kLeft);
    world.robot.right = arm_from_json(r.at("right"), ArmSide::kRight);
    world.step_count = doc.at("step_count").get<std::uint64_t>();
    world.rng = StreamRng(doc.at("rng").at("seed").get<std::uint64_t>(),
                          doc.at("rng").at("position").get<std::uint64_t>());
    return world;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed state document: ") + e.what());
  }
}

std::string serialize(const WorldState& world) { return to_json(world).dump(); }

// ---------------------------------------------------------------------------
// Queries.

namespace filter {

ObjectPredicate of_type(ObjectType type) {
  return [type](const WorldState&, const ObjectInstance& o) { return o.type == type; };
}

ObjectPredicate actionable(Actionable a) {
  return [a](const WorldState&, const ObjectInstance& o) { return has_actionable(o.type, a); };
}

ObjectPredicate flag_is(StateFlag flag, bool value) {
  return [flag, value](const WorldState&, const ObjectInstance& o) {
    return o.licenses(flag) && o.flag(flag) == value;
  };
}

ObjectPredicate intact() {
  return [](const WorldState&, const ObjectInstance& o) { return o.intact; };
}

ObjectPredicate within_reach() {
  return [](const WorldState& w, const ObjectInstance& o) {
    return check_reachable(w.robot, ArmSide::kLeft, o) ||
           check_reachable(w.robot, ArmSide::kRight, o);
  };
}

ObjectPredicate all_of(std::vector<ObjectPredicate> parts) {
  return [parts = std::move(parts)](const WorldState& w, const ObjectInstance& o) {
    return std::all_of(parts.begin(), parts.end(), [&](const auto& p) { return p(w, o); });
  };
}

}  // namespace filter

std::vector<const ObjectInstance*> query_objects(const WorldState& world,
                                                 const ObjectPredicate& pred) {
  std::vector<const ObjectInstance*> out;
  for (const auto& [id, o] : world.objects) {
    if (pred(world, o)) out.push_back(&o);
  }
  return out;
}

std::optional<ArmSide> holder_of(const WorldState& world, const std::string& id) {
  if (world.robot.left.held == id) return ArmSide::kLeft;
  if (world.robot.right.held == id) return ArmSide::kRight;
  return std::nullopt;
}

bool held_by_robot(const WorldState& world, const std::string& id) {
  return holder_of(world, id).has_value();
}

const ObjectInstance* container_of(const WorldState& world, const std::string& id) {
  for (const auto& [cid, c] : world.objects) {
    if (std::binary_search(c.contains.begin(), c.contains.end(), id)) return &c;
  }
  return nullptr;
}

bool is_standing(const WorldState& world, const ObjectInstance& object) {
  return object.intact && !held_by_robot(world, object.id) &&
         container_of(world, object.id) == nullptr;
}

bool in_grid(const WorldState& world, int x, int y) {
  return x >= 0 && y >= 0 && x < world.width && y < world.height;
}

bool cell_free(const WorldState& world, int x, int y) {
  if (!in_grid(world, x, y)) return false;
  for (const auto& [id, o] : world.objects) {
    if (o.x == x && o.y == y && is_standing(world, o)) return false;
  }
  return true;
}

std::pair<int, int> heading_vector(Heading heading) {
  switch (heading) {
    case Heading::kN: return {0, 1};
    case Heading::kE: return {1, 0};
    case Heading::kS: return {0, -1};
    case Heading::kW: return {-1, 0};
  }
  return {0, 0};
}

Heading rotate_heading(Heading heading, int quarter_turns_ccw) {
  // N, E, S, W are clockwise, so a counterclockwise turn steps backwards.
  int idx = (static_cast<int>(heading) - quarter_turns_ccw) % 4;
  if (idx < 0) idx += 4;
  return static_cast<Heading>(idx);
}

std::vector<std::string> check_invariants(const WorldState& world) {
  std::vector<std::string> problems;
  auto complain = [&](const std::string& s) { problems.push_back(s); };

  if (!in_grid(world, world.robot.x, world.robot.y)) complain("robot outside the grid");
  if (!cell_free(world, world.robot.x, world.robot.y)) complain("robot shares a cell with an object");

  std::set<std::tuple<int, int, HeightBand>> occupied;
  std::map<std::string, int> containment;
  for (const auto& [id, o] : world.objects) {
    for (const auto& cid : o.contains) ++containment[cid];
  }
  for (const auto& [id, o] : world.objects) {
    for (const auto& [flag, value] : o.flags) {
      if (!flag_licensed(o.type, flag)) {
        complain(id + " carries unlicensed flag " + std::string(to_string(flag)));
      }
    }
    if (!in_grid(world, o.x, o.y)) complain(id + " lies outside the grid");
    bool left = world.robot.left.held == id;
    bool right = world.robot.right.held == id;
    if (o.flag(StateFlag::kIsLifted) != (left && right)) {
      complain(id + ": IsLifted disagrees with the arms");
    }
    if (o.flag(StateFlag::kIsPickedUp) && (left == right)) {
      complain(id + ": IsPickedUp needs exactly one holding arm");
    }
    if ((left || right) && !o.flag(StateFlag::kIsPickedUp) && !o.flag(StateFlag::kIsLifted)) {
      complain(id + " is held without IsPickedUp/IsLifted");
    }
    if (!o.intact && (left || right)) complain(id + " is broken but still held");
    if (containment[id] > 1) complain(id + " sits in more than one container");
    if (containment[id] == 1 && (left || right)) complain(id + " is both held and contained");
    if (!std::is_sorted(o.contains.begin(), o.contains.end())) {
      complain(id + ": contents not sorted");
    }
    for (const auto& cid : o.contains) {
      const ObjectInstance* inner = world.find(cid);
      if (inner == nullptr) {
        complain(id + " contains unknown " + cid);
      } else if (inner->x != o.x || inner->y != o.y || inner->band != o.band) {
        complain(cid + " is not at its container's position");
      }
    }
    if (is_standing(world, o) && !occupied.emplace(o.x, o.y, o.band).second) {
      complain("two standing objects share the cell of " + id);
    }
  }
  for (ArmSide side : {ArmSide::kLeft, ArmSide::kRight}) {
    const ArmState& arm = world.robot.arm(side);
    if (arm.held && world.find(*arm.held) == nullptr) complain("arm holds unknown object");
    if (arm.engaged && world.find(*arm.engaged) == nullptr) complain("arm engages unknown object");
    if (arm.busy) complain("arm busy between steps");
  }
  return problems;
}

// ---------------------------------------------------------------------------
// Effects.

void apply_effect_in_place(WorldState& world, const Effect& e) {
  std::visit(
      [&](const auto& eff) {
        using T = std::decay_t<decltype(eff)>;
        if constexpr (std::is_same_v<T, effect::SetFlag>) {
          ObjectInstance& o = mutable_object(world, eff.object);
          if (!o.licenses(eff.flag)) {
            throw SchemaError(std::string(to_string(eff.flag)) + " not licensed for " + o.id);
          }
          o.flags[eff.flag] = eff.value;
        } else if constexpr (std::is_same_v<T, effect::MarkBroken>) {
          ObjectInstance& o = mutable_object(world, eff.object);
          o.intact = false;
          set_flag_if_licensed(o, StateFlag::kIsPickedUp, false);
          set_flag_if_licensed(o, StateFlag::kIsLifted, false);
          for (ArmSide side : {ArmSide::kLeft, ArmSide::kRight}) {
            ArmState& arm = world.robot.arm(side);
            if (arm.held == eff.object) arm.held.reset();
            if (arm.engaged == eff.object) arm.engaged.reset();
          }
          detach_from_container(world, eff.object);
        } else if constexpr (std::is_same_v<T, effect::MarkSpilled>) {
          ObjectInstance& o = mutable_object(world, eff.object);
          o.spilled = true;
          set_flag_if_licensed(o, StateFlag::kIsFilled, false);
        } else if constexpr (std::is_same_v<T, effect::MoveRobot>) {
          auto [dx, dy] = direction_vector(world.robot.heading, eff.direction);
          int x = world.robot.x;
          int y = world.robot.y;
          for (int i = 0; i < eff.cells; ++i) {
            x += dx;
            y += dy;
            if (!in_grid(world, x, y) || !cell_free(world, x, y)) {
              throw PlacementError("move blocked at (" + std::to_string(x) + "," +
                                   std::to_string(y) + ")");
            }
          }
          place_robot(world, x, y);
        } else if constexpr (std::is_same_v<T, effect::RotateRobot>) {
          world.robot.heading = rotate_heading(world.robot.heading, eff.quarter_turns_ccw);
        } else if constexpr (std::is_same_v<T, effect::PlaceRobot>) {
          place_robot(world, eff.x, eff.y);
          world.robot.heading = eff.heading;
        } else if constexpr (std::is_same_v<T, effect::SetPosture>) {
          world.robot.posture = eff.posture;
        } else if constexpr (std::is_same_v<T, effect::Grasp>) {
          ObjectInstance& o = mutable_object(world, eff.object);
          ArmState& arm = world.robot.arm(eff.side);
          if (arm.held) throw PlacementError("arm already holds " + *arm.held);
          arm.held = eff.object;
          set_flag_if_licensed(o, StateFlag::kIsPickedUp, true);
          detach_from_container(world, eff.object);
          carry_held_objects(world);
        } else if constexpr (std::is_same_v<T, effect::GraspBoth>) {
          ObjectInstance& o = mutable_object(world, eff.object);
          if (world.robot.left.held || world.robot.right.held) {
            throw PlacementError("both arms must be empty to lift");
          }
          world.robot.left.held = eff.object;
          world.robot.right.held = eff.object;
          set_flag_if_licensed(o, StateFlag::kIsLifted, true);
          detach_from_container(world, eff.object);
          carry_held_objects(world);
        } else if constexpr (std::is_same_v<T, effect::PutInto>) {
          ObjectInstance& o = mutable_object(world, eff.object);
          ObjectInstance& c = mutable_object(world, eff.container);
          ArmState& arm = world.robot.arm(eff.side);
          if (arm.held != eff.object) throw PlacementError("arm does not hold " + eff.object);
          arm.held.reset();
          set_flag_if_licensed(o, StateFlag::kIsPickedUp, false);
          o.x = c.x;
          o.y = c.y;
          o.band = c.band;
          c.contains.insert(std::upper_bound(c.contains.begin(), c.contains.end(), o.id), o.id);
        } else if constexpr (std::is_same_v<T, effect::Engage>) {
          mutable_object(world, eff.object);
          world.robot.arm(eff.side).engaged = eff.object;
        } else if constexpr (std::is_same_v<T, effect::Disengage>) {
          world.robot.arm(eff.side).engaged.reset();
        } else if constexpr (std::is_same_v<T, effect::Block>) {
          mutable_object(world, eff.object).blocked[eff.action] = eff.outcome;
        } else if constexpr (std::is_same_v<T, effect::SetJoints>) {
          world.robot.arm(eff.side).joints.angles = eff.angles;
        } else if constexpr (std::is_same_v<T, effect::CountUse>) {
          ++mutable_object(world, eff.object).use_count;
        } else if constexpr (std::is_same_v<T, effect::AdvanceStep>) {
          ++world.step_count;
        }
      },
      e);
}

WorldState apply_effect(const WorldState& world, const Effect& effect) {
  WorldState next = world;
  apply_effect_in_place(next, effect);
  return next;
}

}  // namespace dualhab
