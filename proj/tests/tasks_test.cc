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

#include <map>
#include <set>

#include <gtest/gtest.h>

#include "dualhab/actions.h"
#include "dualhab/error.h"
#include "support/single_arm_search.h"
#include "support/test_paths.h"

namespace dualhab {
namespace {

using nlohmann::json;

WorldState orchard() {
  return load_scene(parse_scene(json::parse(R"({
    "schema_version": 1,
    "scene_id": "orchard",
    "room_kind": "Kitchen",
    "grid": {"w": 4, "h": 4},
    "robot_start": {"x": 1, "y": 1, "heading": "N"},
    "objects": [
      {"id": "Kitchen_Apple_01", "type": "Apple", "x": 1, "y": 2, "band": "counter", "flags": {}},
      {"id": "Kitchen_Apple_02", "type": "Apple", "x": 2, "y": 1, "band": "counter", "flags": {}},
      {"id": "Kitchen_Bowl_01", "type": "Bowl", "x": 0, "y": 1, "band": "counter", "flags": {}}
    ]
  })")));
}

void hold(WorldState& w, ArmSide side, const std::string& id) {
  w.robot.arm(side).held = id;
  w.objects.at(id).flags[StateFlag::kIsPickedUp] = true;
}

TEST(TemplateTest, CatalogueShape) {
  const auto& all = task_templates();
  EXPECT_EQ(all.size(), 15u);
  std::map<TaskCategory, int> per_category;
  for (const TaskTemplate& t : all) {
    per_category[t.category] += t.manifest_count;
    EXPECT_EQ(find_template(t.name).name, t.name);
    EXPECT_EQ(find_template(t.alias).name, t.name);
  }
  EXPECT_EQ(per_category[TaskCategory::kSingleArm], 58);
  EXPECT_EQ(per_category[TaskCategory::kDualArmOptional], 133);
  EXPECT_EQ(per_category[TaskCategory::kDualArmEssential], 168);
  EXPECT_EQ(manifest_total(), 359);
  EXPECT_THROW(find_template("juggle"), UnknownEntity);
}

TEST(TemplateTest, CategoryNames) {
  for (TaskCategory c : {TaskCategory::kSingleArm, TaskCategory::kDualArmOptional,
                         TaskCategory::kDualArmEssential}) {
    EXPECT_EQ(parse_category(to_string(c)), c);
  }
  EXPECT_FALSE(parse_category("Triple").has_value());
}

TEST(InstantiateTest, PickBindsEveryLooseObject) {
  WorldState w = orchard();
  auto tasks = instantiate(w, find_template("pick"));
  ASSERT_EQ(tasks.size(), 3u);
  EXPECT_EQ(tasks[0].task_id, "orchard:pick_objects:Kitchen_Apple_01");
  EXPECT_EQ(tasks[0].bound("object"), "Kitchen_Apple_01");
  EXPECT_EQ(classify(tasks[0]), TaskCategory::kSingleArm);
  EXPECT_THROW(instantiate(w, find_template("toggle")), NoValidBinding);
}

TEST(InstantiateTest, SkippedTemplatesAreReported) {
  std::vector<std::string> skipped;
  auto tasks = instantiate_all(orchard(), &skipped);
  EXPECT_FALSE(tasks.empty());
  EXPECT_NE(std::find(skipped.begin(), skipped.end(), "toggle_objects"), skipped.end());
  for (const TaskInstance& t : tasks) EXPECT_TRUE(check_binding(orchard(), t).empty()) << t.task_id;
}

TEST(EvaluateTest, PickGoal) {
  WorldState w = orchard();
  TaskInstance task = instantiate(w, find_template("pick")).front();
  EXPECT_EQ(evaluate(w, task), TaskStatus::kInProgress);
  hold(w, ArmSide::kLeft, "Kitchen_Apple_01");
  EXPECT_EQ(evaluate(w, task), TaskStatus::kSuccess);
}

TEST(EvaluateTest, BrokenSlotRebindsToSameType) {
  WorldState w = orchard();
  TaskInstance task = instantiate(w, find_template("pick")).front();
  w.objects.at("Kitchen_Apple_01").intact = false;
  EXPECT_EQ(evaluate(w, task), TaskStatus::kInProgress);
  hold(w, ArmSide::kRight, "Kitchen_Apple_02");
  EXPECT_EQ(evaluate(w, task), TaskStatus::kSuccess);
  auto slots = resolve_bindings(w, task);
  ASSERT_TRUE(slots.has_value());
  EXPECT_EQ(slots->at("object"), "Kitchen_Apple_02");
}

TEST(EvaluateTest, NoSubstituteMeansFailed) {
  WorldState w = orchard();
  TaskInstance task = instantiate(w, find_template("pick")).front();
  w.objects.at("Kitchen_Apple_01").intact = false;
  w.objects.at("Kitchen_Apple_02").intact = false;
  EXPECT_EQ(evaluate(w, task), TaskStatus::kFailed);
  TaskInstance bowl = instantiate(w, find_template("pick")).back();
  EXPECT_EQ(evaluate(w, bowl), TaskStatus::kInProgress);
}

TEST(EvaluateTest, PlaceSameNeedsBothObjectsInside) {
  WorldState w = orchard();
  TaskInstance task = select_task(w, "placesame");
  EXPECT_EQ(task.template_name, "place_same");
  EXPECT_EQ(evaluate(w, task), TaskStatus::kInProgress);
  for (const char* slot : {"object_a", "object_b"}) {
    EXPECT_EQ(evaluate(w, task), TaskStatus::kInProgress);
    w = apply_effect(w, effect::Grasp{ArmSide::kLeft, task.bound(slot)});
    w = apply_effect(w, effect::PutInto{ArmSide::kLeft, task.bound(slot), task.bound("container")});
  }
  EXPECT_EQ(evaluate(w, task), TaskStatus::kSuccess);
}

TEST(SelectTaskTest, Selectors) {
  WorldState w = load_scene(testing::bundled_scene("kitchen_01"));
  EXPECT_EQ(select_task(w, "pick_cup").template_name, "pick_objects");
  EXPECT_EQ(w.object(select_task(w, "pick_Cup").bound("object")).type, ObjectType::kCup);
  TaskInstance full = select_task(w, "pick_objects");
  EXPECT_EQ(select_task(w, full.task_id), full);
  EXPECT_THROW(select_task(w, "pick_Fridge"), UnknownEntity);
  EXPECT_THROW(select_task(w, "nonsense"), UnknownEntity);
}

TEST(ManifestTest, BundledCountsMatchTemplates) {
  Manifest m = load_manifest(testing::repo_data_dir() / "manifest.json");
  EXPECT_EQ(static_cast<int>(m.tasks.size()), 359);
  std::map<std::string, int> counts = count_by_template(m);
  for (const TaskTemplate& t : task_templates()) {
    EXPECT_EQ(counts[t.name], t.manifest_count) << t.name;
  }
  std::set<std::string> ids;
  for (const TaskInstance& t : m.tasks) EXPECT_TRUE(ids.insert(t.task_id).second) << t.task_id;
}

TEST(ManifestTest, BindingsValidAgainstScenes) {
  Manifest m = load_manifest(testing::repo_data_dir() / "manifest.json");
  std::map<std::string, WorldState> worlds;
  for (const SceneSpec& s : load_scene_dir(testing::repo_data_dir() / "scenes")) {
    worlds.emplace(s.scene_id, load_scene(s));
  }
  for (const TaskInstance& t : m.tasks) {
    ASSERT_TRUE(worlds.count(t.scene_id)) << t.task_id;
    EXPECT_TRUE(check_binding(worlds.at(t.scene_id), t).empty()) << t.task_id;
    EXPECT_EQ(evaluate(worlds.at(t.scene_id), t), TaskStatus::kInProgress) << t.task_id;
  }
}

TEST(ManifestTest, RegenerationMatchesFrozenFile) {
  Manifest frozen = load_manifest(testing::repo_data_dir() / "manifest.json");
  Manifest regen = generate_manifest(load_scene_dir(testing::repo_data_dir() / "scenes"));
  EXPECT_EQ(regen.tasks, frozen.tasks);
  EXPECT_EQ(task_from_json(task_to_json(frozen.tasks.front())), frozen.tasks.front());
}

TEST(ManifestTest, MissingObjectIsABindingProblem) {
  WorldState w = orchard();
  TaskInstance t = instantiate(w, find_template("pick")).front();
  t.bindings.front().second = "Kitchen_Apple_09";
  EXPECT_FALSE(check_binding(w, t).empty());
}

// Soundness of the category labels on the mini scenes: with one arm only,
// essential tasks are never solved, and every single-arm or optional task has
// a witness plan that replays to success.
TEST(SingleArmSearchTest, CategoriesOnMiniScenes) {
  for (const std::string id : {"mini_kitchen", "mini_cafe", "mini_bath"}) {
    SceneSpec scene = testing::mini_scene(id);
    WorldState start = load_scene(scene);
    auto tasks = instantiate_all(start);
    auto report = testing::single_arm_search(scene, tasks, 12);
    for (const TaskInstance& t : tasks) {
      const bool solved = report.solved_depth.count(t.task_id) != 0;
      if (classify(t) == TaskCategory::kDualArmEssential) {
        EXPECT_FALSE(solved) << t.task_id;
        continue;
      }
      ASSERT_TRUE(solved) << t.task_id;
      ExecContext ctx;
      ctx.difficulty = DifficultyLevel::easy();
      WorldState w = start;
      for (const ActionCommand& cmd : report.plans.at(t.task_id)) {
        auto [next, res] = execute(w, cmd, ctx);
        ASSERT_TRUE(res.success) << t.task_id << " " << to_text(cmd);
        w = std::move(next);
      }
      EXPECT_EQ(evaluate(w, t), TaskStatus::kSuccess) << t.task_id;
    }
  }
}

}  // namespace
}  // namespace dualhab
