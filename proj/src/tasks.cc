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

#include "dualhab/tasks.h"

#include <algorithm>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>

#include "dualhab/error.h"

namespace dualhab {
namespace {

using TC = TaskCategory;
using OT = ObjectType;
using SF = StateFlag;

// Binding enumeration works on the initial state, so everything here reads
// flags as loaded.
using Objects = std::vector<const ObjectInstance*>;

Objects all_objects(const WorldState& w, const std::function<bool(const ObjectInstance&)>& pred) {
  Objects out;
  for (const auto& [id, o] : w.objects) {
    if (o.intact && pred(o)) out.push_back(&o);
  }
  return out;
}

bool pickupable(const ObjectInstance& o) {
  return has_actionable(o.type, Actionable::kPickupable);
}

bool in_sprung(const WorldState& w, const ObjectInstance& o) {
  const ObjectInstance* c = container_of(w, o.id);
  return c != nullptr && c->springs_shut;
}

bool inside(const WorldState& w, const std::string& obj, const std::string& container) {
  const ObjectInstance* c = w.find(container);
  return c != nullptr && std::binary_search(c->contains.begin(), c->contains.end(), obj);
}

// Free object the robot can pick without a second arm.
bool loose(const WorldState& w, const ObjectInstance& o) {
  return pickupable(o) && o.contains.empty() && !in_sprung(w, o);
}

// Receptacle a single arm can fill: not sprung and not a tap.
bool plain_receptacle(const ObjectInstance& o) {
  return type_info(o.type).receptacle && !o.springs_shut && o.type != OT::kFaucet;
}

bool fill_point(OT t) { return t == OT::kCoffeeMachine || t == OT::kFaucet; }

bool empty_fill_capacity(const ObjectInstance& c, int needed) {
  if (!fill_point(c.type)) return true;
  return static_cast<int>(c.contains.size()) + needed <= 1;
}

bool has_latching_source(const WorldState& w) {
  for (const auto& [id, o] : w.objects) {
    if (o.type == OT::kCoffeeMachine) return true;
    if (o.type == OT::kFaucet && !o.springs_shut) return true;
  }
  return false;
}

bool fillable_empty(const WorldState& w, const ObjectInstance& o) {
  return is_fillable_container(o.type) && !o.flag(SF::kIsFilled) && loose(w, o);
}

using Binding = std::vector<const ObjectInstance*>;
using Enumerator = std::function<std::vector<Binding>(const WorldState&)>;
using Goal = std::function<bool(const WorldState&, const SlotAssignment&)>;

bool held(const WorldState& w, const std::string& id) { return held_by_robot(w, id); }
bool flag_of(const WorldState& w, const std::string& id, SF f) {
  const ObjectInstance* o = w.find(id);
  return o != nullptr && o->intact && o->flag(f);
}

struct TemplateDef {
  TaskTemplate info;
  Enumerator enumerate;
  Goal goal;
};

std::vector<Binding> singles(const Objects& objs) {
  std::vector<Binding> out;
  for (const auto* o : objs) out.push_back({o});
  return out;
}

std::vector<TemplateDef> build_templates() {
  std::vector<TemplateDef> t;

  // -------------------------------------------------------------- single arm
  t.push_back({{"pick_objects", "pick", "Pick objects", TC::kSingleArm, {"object"}, 20},
               [](const WorldState& w) {
                 return singles(all_objects(w, [&](const ObjectInstance& o) {
                   return loose(w, o) && !held(w, o.id);
                 }));
               },
               [](const WorldState& w, const SlotAssignment& s) {
                 return held(w, s.at("object")) && flag_of(w, s.at("object"), SF::kIsPickedUp);
               }});

  t.push_back({{"toggle_objects", "toggle", "Toggle objects", TC::kSingleArm, {"object"}, 12},
               [](const WorldState& w) {
                 return singles(all_objects(w, [&](const ObjectInstance& o) {
                   return has_actionable(o.type, Actionable::kToggleable) && !o.springs_shut &&
                          !o.flag(SF::kIsToggledOn);
                 }));
               },
               [](const WorldState& w, const SlotAssignment& s) {
                 return flag_of(w, s.at("object"), SF::kIsToggledOn);
               }});

  t.push_back({{"open_objects", "open", "Open objects", TC::kSingleArm, {"object"}, 12},
               [](const WorldState& w) {
                 return singles(all_objects(w, [&](const ObjectInstance& o) {
                   return has_actionable(o.type, Actionable::kOpenable) && !o.springs_shut &&
                          !o.flag(SF::kIsOpen) && !in_sprung(w, o);
                 }));
               },
               [](const WorldState& w, const SlotAssignment& s) {
                 return flag_of(w, s.at("object"), SF::kIsOpen);
               }});

  t.push_back({{"fill_objects", "fill", "Fill objects with liquid", TC::kSingleArm,
                {"container", "source"}, 6},
               [](const WorldState& w) {
                 std::vector<Binding> out;
                 auto taps = all_objects(w, [](const ObjectInstance& o) {
                   return o.type == OT::kFaucet && !o.springs_shut;
                 });
                 for (const auto* c : all_objects(w, [&](const ObjectInstance& o) {
                        return fillable_empty(w, o);
                      })) {
                   for (const auto* f : taps) out.push_back({c, f});
                 }
                 return out;
               },
               [](const WorldState& w, const SlotAssignment& s) {
                 return flag_of(w, s.at("container"), SF::kIsFilled);
               }});

  t.push_back({{"use_up_objects", "useup", "Use up objects", TC::kSingleArm, {"object"}, 4},
               [](const WorldState& w) {
                 return singles(all_objects(w, [&](const ObjectInstance& o) {
                   return o.licenses(SF::kIsUsedUp) && !o.flag(SF::kIsUsedUp) && !in_sprung(w, o);
                 }));
               },
               [](const WorldState& w, const SlotAssignment& s) {
                 return flag_of(w, s.at("object"), SF::kIsUsedUp);
               }});

  t.push_back({{"slice_objects", "slice", "Slice objects", TC::kSingleArm, {"object", "knife"}, 2},
               [](const WorldState& w) {
                 std::vector<Binding> out;
                 auto knives = all_objects(w, [&](const ObjectInstance& o) {
                   return o.type == OT::kKnife && loose(w, o);
                 });
                 for (const auto* o : all_objects(w, [&](const ObjectInstance& o) {
                        return has_actionable(o.type, Actionable::kSliceable) &&
                               !o.flag(SF::kIsSliced) && !in_sprung(w, o);
                      })) {
                   for (const auto* k : knives) out.push_back({o, k});
                 }
                 return out;
               },
               [](const WorldState& w, const SlotAssignment& s) {
                 return flag_of(w, s.at("object"), SF::kIsSliced);
               }});

  t.push_back({{"cook_objects", "cook", "Cook objects", TC::kSingleArm, {"object"}, 2},
               [](const WorldState& w) {
                 return singles(all_objects(w, [&](const ObjectInstance& o) {
                   return o.licenses(SF::kIsCooked) && !o.flag(SF::kIsCooked) && !in_sprung(w, o);
                 }));
               },
               [](const WorldState& w, const SlotAssignment& s) {
                 return flag_of(w, s.at("object"), SF::kIsCooked);
               }});

  // ---------------------------------------------------------- dual optional
  t.push_back({{"place_different", "placediff",
                "Pick different objects and place in different containers",
                TC::kDualArmOptional, {"object_a", "object_b", "container_a", "container_b"}, 63},
               [](const WorldState& w) {
                 std::vector<Binding> out;
                 auto items = all_objects(w, [&](const ObjectInstance& o) { return loose(w, o); });
                 auto bins = all_objects(w, [&](const ObjectInstance& o) {
                   return plain_receptacle(o) && empty_fill_capacity(o, 1);
                 });
                 for (std::size_t i = 0; i < items.size(); ++i) {
                   for (std::size_t j = i + 1; j < items.size(); ++j) {
                     for (const auto* ca : bins) {
                       for (const auto* cb : bins) {
                         if (ca == cb) continue;
                         const auto *a = items[i], *b = items[j];
                         if (ca == a || ca == b || cb == a || cb == b) continue;
                         if (inside(w, a->id, ca->id) || inside(w, b->id, cb->id)) continue;
                         out.push_back({a, b, ca, cb});
                       }
                     }
                   }
                 }
                 return out;
               },
               [](const WorldState& w, const SlotAssignment& s) {
                 return inside(w, s.at("object_a"), s.at("container_a")) &&
                        inside(w, s.at("object_b"), s.at("container_b"));
               }});

  t.push_back({{"place_same", "placesame", "Pick different objects and place in the same container",
                TC::kDualArmOptional, {"object_a", "object_b", "container"}, 27},
               [](const WorldState& w) {
                 std::vector<Binding> out;
                 auto items = all_objects(w, [&](const ObjectInstance& o) { return loose(w, o); });
                 auto bins = all_objects(w, [&](const ObjectInstance& o) {
                   return plain_receptacle(o) && !fill_point(o.type);
                 });
                 for (std::size_t i = 0; i < items.size(); ++i) {
                   for (std::size_t j = i + 1; j < items.size(); ++j) {
                     for (const auto* c : bins) {
                       const auto *a = items[i], *b = items[j];
                       if (c == a || c == b) continue;
                       if (inside(w, a->id, c->id) && inside(w, b->id, c->id)) continue;
                       out.push_back({a, b, c});
                     }
                   }
                 }
                 return out;
               },
               [](const WorldState& w, const SlotAssignment& s) {
                 return inside(w, s.at("object_a"), s.at("container")) &&
                        inside(w, s.at("object_b"), s.at("container"));
               }});

  t.push_back({{"open_place", "openplace", "Open general containers and pick/place objects",
                TC::kDualArmOptional, {"object", "container"}, 19},
               [](const WorldState& w) {
                 std::vector<Binding> out;
                 auto items = all_objects(w, [&](const ObjectInstance& o) { return loose(w, o); });
                 for (const auto* c : all_objects(w, [](const ObjectInstance& o) {
                        return plain_receptacle(o) && o.licenses(SF::kIsOpen) &&
                               !o.flag(SF::kIsOpen);
                      })) {
                   for (const auto* o : items) {
                     if (!inside(w, o->id, c->id)) out.push_back({o, c});
                   }
                 }
                 // Order by object id first, as elsewhere.
                 std::stable_sort(out.begin(), out.end(), [](const Binding& a, const Binding& b) {
                   return a[0]->id < b[0]->id;
                 });
                 return out;
               },
               [](const WorldState& w, const SlotAssignment& s) {
                 return flag_of(w, s.at("container"), SF::kIsOpen) &&
                        inside(w, s.at("object"), s.at("container"));
               }});

  t.push_back({{"pick_and_slice", "pickslice", "Pick and slice the same object",
                TC::kDualArmOptional, {"object", "knife"}, 15},
               [](const WorldState& w) {
                 std::vector<Binding> out;
                 // One arm alone must be able to put the knife down again.
                 bool has_shelf = !all_objects(w, [](const ObjectInstance& o) {
                                     return plain_receptacle(o) && !pickupable(o);
                                   }).empty();
                 if (!has_shelf) return out;
                 auto knives = all_objects(w, [&](const ObjectInstance& o) {
                   return o.type == OT::kKnife && loose(w, o);
                 });
                 for (const auto* o : all_objects(w, [&](const ObjectInstance& o) {
                        return has_actionable(o.type, Actionable::kSliceable) &&
                               !o.flag(SF::kIsSliced) && loose(w, o);
                      })) {
                   for (const auto* k : knives) out.push_back({o, k});
                 }
                 return out;
               },
               [](const WorldState& w, const SlotAssignment& s) {
                 return flag_of(w, s.at("object"), SF::kIsSliced) && held(w, s.at("object"));
               }});

  t.push_back({{"pick_filled", "pickfilled", "Pick objects filled with liquid",
                TC::kDualArmOptional, {"container", "machine"}, 9},
               [](const WorldState& w) {
                 std::vector<Binding> out;
                 auto machines = all_objects(w, [](const ObjectInstance& o) {
                   return o.type == OT::kCoffeeMachine && o.contains.empty();
                 });
                 for (const auto* c : all_objects(w, [&](const ObjectInstance& o) {
                        return fillable_empty(w, o);
                      })) {
                   for (const auto* m : machines) out.push_back({c, m});
                 }
                 return out;
               },
               [](const WorldState& w, const SlotAssignment& s) {
                 return flag_of(w, s.at("container"), SF::kIsFilled) && held(w, s.at("container"));
               }});

  // --------------------------------------------------------- dual essential
  t.push_back({{"affordance_place", "affordance",
                "Open affordance-specific containers and pick/place objects",
                TC::kDualArmEssential, {"object", "container"}, 97},
               [](const WorldState& w) {
                 std::vector<Binding> out;
                 auto bins = all_objects(w, [](const ObjectInstance& o) {
                   return type_info(o.type).receptacle && o.springs_shut &&
                          o.licenses(SF::kIsOpen);
                 });
                 for (const auto* o : all_objects(w, [&](const ObjectInstance& o) {
                        return loose(w, o);
                      })) {
                   for (const auto* c : bins) {
                     if (!inside(w, o->id, c->id)) out.push_back({o, c});
                   }
                 }
                 return out;
               },
               [](const WorldState& w, const SlotAssignment& s) {
                 return inside(w, s.at("object"), s.at("container"));
               }});

  t.push_back({{"lift_objects", "lift", "Lift objects", TC::kDualArmEssential, {"object"}, 39},
               [](const WorldState& w) {
                 return singles(all_objects(w, [](const ObjectInstance& o) {
                   return has_actionable(o.type, Actionable::kMovable) && o.contains.empty();
                 }));
               },
               [](const WorldState& w, const SlotAssignment& s) {
                 return flag_of(w, s.at("object"), SF::kIsLifted);
               }});

  t.push_back({{"hold_filled", "holdfill", "Hold objects filled with liquid",
                TC::kDualArmEssential, {"container", "source"}, 32},
               [](const WorldState& w) {
                 std::vector<Binding> out;
                 // Any fixed fill point would let one arm fill a parked
                 // container.
                 if (has_latching_source(w)) return out;
                 auto taps = all_objects(w, [](const ObjectInstance& o) {
                   return o.type == OT::kFaucet && o.springs_shut;
                 });
                 for (const auto* c : all_objects(w, [&](const ObjectInstance& o) {
                        return fillable_empty(w, o);
                      })) {
                   for (const auto* f : taps) out.push_back({c, f});
                 }
                 return out;
               },
               [](const WorldState& w, const SlotAssignment& s) {
                 return flag_of(w, s.at("container"), SF::kIsFilled) && held(w, s.at("container"));
               }});
  return t;
}

const std::vector<TemplateDef>& defs() {
  static const std::vector<TemplateDef> kDefs = build_templates();
  return kDefs;
}

const TemplateDef& find_def(std::string_view name) {
  for (const auto& d : defs()) {
    if (d.info.name == name || d.info.alias == name) return d;
  }
  throw UnknownEntity("unknown task template '" + std::string(name) + "'");
}

std::string make_task_id(const std::string& scene, const std::string& tmpl, const Binding& b) {
  std::string id = scene + ":" + tmpl + ":";
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (i > 0) id += "+";
    id += b[i]->id;
  }
  return id;
}

// Largest step below n / 1.618 that is coprime to n; 1 for small pools.
std::size_t spread_stride(std::size_t n) {
  for (std::size_t k = static_cast<std::size_t>(static_cast<double>(n) / 1.618); k > 1; --k) {
    if (std::gcd(k, n) == 1) return k;
  }
  return 1;
}

SlotAssignment initial_assignment(const TaskInstance& task) {
  SlotAssignment s;
  for (const auto& [slot, id] : task.bindings) s[slot] = id;
  return s;
}

}  // namespace

std::string_view to_string(TaskCategory c) {
  switch (c) {
    case TC::kSingleArm: return "SingleArm";
    case TC::kDualArmOptional: return "DualArmOptional";
    case TC::kDualArmEssential: return "DualArmEssential";
  }
  return "?";
}

std::string_view to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::kInProgress: return "InProgress";
    case TaskStatus::kSuccess: return "Success";
    case TaskStatus::kFailed: return "Failed";
  }
  return "?";
}

std::optional<TaskCategory> parse_category(std::string_view s) {
  for (TC c : {TC::kSingleArm, TC::kDualArmOptional, TC::kDualArmEssential}) {
    if (iequals(to_string(c), s)) return c;
  }
  return std::nullopt;
}

const std::vector<TaskTemplate>& task_templates() {
  static const std::vector<TaskTemplate> kList = [] {
    std::vector<TaskTemplate> v;
    for (const auto& d : defs()) v.push_back(d.info);
    return v;
  }();
  return kList;
}

const TaskTemplate& find_template(std::string_view name) { return find_def(name).info; }

int manifest_total() {
  int total = 0;
  for (const auto& t : task_templates()) total += t.manifest_count;
  return total;
}

const std::string& TaskInstance::bound(std::string_view slot) const {
  for (const auto& [s, id] : bindings) {
    if (s == slot) return id;
  }
  throw UnknownEntity("task " + task_id + " has no slot '" + std::string(slot) + "'");
}

std::vector<TaskInstance> instantiate(const WorldState& world, const TaskTemplate& tmpl) {
  const TemplateDef& def = find_def(tmpl.name);
  std::vector<TaskInstance> out;
  for (const Binding& b : def.enumerate(world)) {
    TaskInstance t;
    t.template_name = def.info.name;
    t.scene_id = world.scene_id;
    t.task_id = make_task_id(world.scene_id, def.info.name, b);
    for (std::size_t i = 0; i < b.size(); ++i) {
      t.bindings.emplace_back(def.info.slots[i], b[i]->id);
    }
    out.push_back(std::move(t));
  }
  if (out.empty()) {
    throw NoValidBinding("template " + def.info.name + " has no binding in " + world.scene_id);
  }
  return out;
}

std::vector<TaskInstance> instantiate_all(const WorldState& world,
                                          std::vector<std::string>* skipped) {
  std::vector<TaskInstance> out;
  for (const auto& tmpl : task_templates()) {
    try {
      auto v = instantiate(world, tmpl);
      out.insert(out.end(), v.begin(), v.end());
    } catch (const NoValidBinding&) {
      if (skipped) skipped->push_back(tmpl.name);
    }
  }
  return out;
}

bool goal_holds(const WorldState& world, const TaskInstance& task, const SlotAssignment& slots) {
  return find_def(task.template_name).goal(world, slots);
}

std::optional<SlotAssignment> resolve_bindings(const WorldState& world, const TaskInstance& task) {
  SlotAssignment base = initial_assignment(task);
  std::vector<std::string> open_slots;
  std::set<std::string> taken;
  for (const auto& [slot, id] : task.bindings) {
    const ObjectInstance* o = world.find(id);
    if (o == nullptr || !o->intact) {
      open_slots.push_back(slot);
    } else {
      taken.insert(id);
    }
  }
  if (open_slots.empty()) return base;

  // Injective re-binding of broken slots to intact objects of the same type.
  // Keep the first complete assignment, but prefer one meeting the goal.
  std::optional<SlotAssignment> first;
  SlotAssignment current = base;
  std::function<bool(std::size_t)> search = [&](std::size_t k) -> bool {
    if (k == open_slots.size()) {
      if (!first) first = current;
      return goal_holds(world, task, current);
    }
    const std::string& slot = open_slots[k];
    const ObjectType type = world.object(base.at(slot)).type;
    for (const auto& [id, o] : world.objects) {
      if (o.type != type || !o.intact || taken.count(id)) continue;
      taken.insert(id);
      current[slot] = id;
      bool done = search(k + 1);
      taken.erase(id);
      if (done) return true;
    }
    current[slot] = base.at(slot);
    return false;
  };
  if (search(0)) return current;
  return first;
}

TaskStatus evaluate(const WorldState& world, const TaskInstance& task) {
  auto slots = resolve_bindings(world, task);
  if (!slots) return TaskStatus::kFailed;
  return goal_holds(world, task, *slots) ? TaskStatus::kSuccess : TaskStatus::kInProgress;
}

TaskCategory classify(const TaskInstance& task) {
  return find_template(task.template_name).category;
}

std::vector<std::string> check_binding(const WorldState& world, const TaskInstance& task) {
  std::vector<std::string> problems;
  const TemplateDef* def = nullptr;
  try {
    def = &find_def(task.template_name);
  } catch (const UnknownEntity& e) {
    problems.push_back(e.what());
    return problems;
  }
  if (task.scene_id != world.scene_id) {
    problems.push_back("task names scene " + task.scene_id + ", checked against " + world.scene_id);
  }
  if (task.bindings.size() != def->info.slots.size()) {
    problems.push_back(task.task_id + ": expected " + std::to_string(def->info.slots.size()) +
                       " bindings");
    return problems;
  }
  for (std::size_t i = 0; i < task.bindings.size(); ++i) {
    const auto& [slot, id] = task.bindings[i];
    if (slot != def->info.slots[i]) {
      problems.push_back(task.task_id + ": slot " + std::to_string(i) + " should be '" +
                         def->info.slots[i] + "', got '" + slot + "'");
    }
    if (world.find(id) == nullptr) {
      problems.push_back(task.task_id + ": binding " + slot + "=" + id + " is not in the scene");
    }
  }
  if (!problems.empty()) return problems;
  for (const Binding& b : def->enumerate(world)) {
    bool same = true;
    for (std::size_t i = 0; i < b.size() && same; ++i) same = b[i]->id == task.bindings[i].second;
    if (same) return problems;
  }
  problems.push_back(task.task_id + ": objects do not fit template " + def->info.name);
  return problems;
}

// ---------------------------------------------------------------------------

nlohmann::json task_to_json(const TaskInstance& task) {
  nlohmann::json b = nlohmann::json::object();
  for (const auto& [slot, id] : task.bindings) b[slot] = id;
  return {{"task_id", task.task_id},
          {"template", task.template_name},
          {"scene_id", task.scene_id},
          {"bindings", b}};
}

TaskInstance task_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("task entry must be an object");
  for (const auto& [k, v] : doc.items()) {
    if (k != "task_id" && k != "template" && k != "scene_id" && k != "bindings") {
      throw SchemaError("unknown task field '" + k + "'");
    }
  }
  TaskInstance t;
  try {
    t.template_name = doc.at("template").get<std::string>();
    t.scene_id = doc.at("scene_id").get<std::string>();
    const TaskTemplate& tmpl = find_template(t.template_name);
    t.template_name = tmpl.name;
    const auto& b = doc.at("bindings");
    if (!b.is_object()) throw SchemaError("bindings must be an object");
    for (const std::string& slot : tmpl.slots) {
      if (!b.contains(slot)) throw SchemaError("binding for slot '" + slot + "' missing");
      t.bindings.emplace_back(slot, b.at(slot).get<std::string>());
    }
    if (b.size() != tmpl.slots.size()) throw SchemaError("unexpected extra bindings");
    if (doc.contains("task_id")) {
      t.task_id = doc.at("task_id").get<std::string>();
    } else {
      t.task_id = t.scene_id + ":" + t.template_name + ":";
      for (std::size_t i = 0; i < t.bindings.size(); ++i) {
        t.task_id += (i > 0 ? "+" : "") + t.bindings[i].second;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("bad task entry: ") + e.what());
  }
  return t;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  const nlohmann::json& list = doc.is_object() && doc.contains("tasks") ? doc.at("tasks") : doc;
  if (!list.is_array()) throw SchemaError(path.string() + ": expected a list of tasks");
  Manifest m;
  for (std::size_t i = 0; i < list.size(); ++i) {
    try {
      m.tasks.push_back(task_from_json(list[i]));
    } catch (const Error& e) {
      throw SchemaError(path.string() + ": task " + std::to_string(i) + ": " + e.what());
    }
  }
  return m;
}

nlohmann::json manifest_to_json(const Manifest& manifest) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& t : manifest.tasks) list.push_back(task_to_json(t));
  return {{"tasks", list}};
}

Manifest generate_manifest(const std::vector<SceneSpec>& scenes) {
  std::vector<WorldState> worlds;
  for (const auto& s : scenes) worlds.push_back(load_scene(s));
  std::sort(worlds.begin(), worlds.end(),
            [](const WorldState& a, const WorldState& b) { return a.scene_id < b.scene_id; });

  Manifest m;
  for (const auto& tmpl : task_templates()) {
    std::vector<std::vector<TaskInstance>> pools;
    for (const auto& w : worlds) {
      try {
        pools.push_back(instantiate(w, tmpl));
      } catch (const NoValidBinding&) {
      }
    }
    // Round-robin over scenes. Within a scene, walk the bindings with a
    // stride coprime to the pool size so picks spread over different objects.
    std::vector<TaskInstance> chosen;
    for (std::size_t round = 0; static_cast<int>(chosen.size()) < tmpl.manifest_count; ++round) {
      bool any = false;
      for (const auto& pool : pools) {
        if (round >= pool.size()) continue;
        any = true;
        chosen.push_back(pool[(round * spread_stride(pool.size())) % pool.size()]);
        if (static_cast<int>(chosen.size()) == tmpl.manifest_count) break;
      }
      if (!any) {
        throw NoValidBinding("scene pack has only " + std::to_string(chosen.size()) +
                             " bindings for " + tmpl.name + ", need " +
                             std::to_string(tmpl.manifest_count));
      }
    }
    m.tasks.insert(m.tasks.end(), chosen.begin(), chosen.end());
  }
  return m;
}

std::map<std::string, int> count_by_template(const Manifest& manifest) {
  std::map<std::string, int> counts;
  for (const auto& t : manifest.tasks) ++counts[t.template_name];
  return counts;
}

TaskInstance select_task(const WorldState& world, std::string_view selector,
                         const Manifest* manifest) {
  const std::string sel(selector);
  if (manifest != nullptr) {
    for (const auto& t : manifest->tasks) {
      if (t.task_id == sel && t.scene_id == world.scene_id) return t;
    }
  }
  std::vector<std::string> skipped;
  const auto all = instantiate_all(world, &skipped);
  for (const auto& t : all) {
    if (t.task_id == sel) return t;
  }

  std::string tmpl_part = sel;
  std::optional<ObjectType> type;
  auto try_template = [](const std::string& name) -> const TaskTemplate* {
    for (const auto& t : task_templates()) {
      if (iequals(t.name, name) || iequals(t.alias, name)) return &t;
    }
    return nullptr;
  };
  const TaskTemplate* tmpl = try_template(tmpl_part);
  if (tmpl == nullptr) {
    auto us = sel.rfind('_');
    if (us != std::string::npos) {
      tmpl = try_template(sel.substr(0, us));
      type = parse_object_type(sel.substr(us + 1));
      if (tmpl != nullptr && !type) tmpl = nullptr;
    }
  }
  if (tmpl == nullptr) throw UnknownEntity("unknown task selector '" + sel + "'");

  auto matches = [&](const TaskInstance& t) {
    if (t.template_name != tmpl->name) return false;
    return !type || world.object(t.bindings.front().second).type == *type;
  };
  // Manifest tasks come first so CLI runs line up with benchmark rows.
  if (manifest != nullptr) {
    for (const auto& t : manifest->tasks) {
      if (t.scene_id == world.scene_id && world.find(t.bindings.front().second) && matches(t)) {
        return t;
      }
    }
  }
  for (const auto& t : all) {
    if (matches(t)) return t;
  }
  throw UnknownEntity("no " + sel + " task in scene " + world.scene_id);
}

}  // namespace dualhab
