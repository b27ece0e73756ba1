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

#include <random>

#include <gtest/gtest.h>

#include "support/random_commands.h"
#include "support/test_paths.h"

namespace dualhab {
namespace {

EnvConfig config(RobotProfile profile = RobotProfile::kX1,
                 DifficultyLevel level = DifficultyLevel::medium()) {
  EnvConfig c;
  c.exec.robot = default_robot_config(profile);
  c.exec.difficulty = level;
  return c;
}

TEST(EnvironmentTest, StepThenUndoRestoresBytes) {
  Environment env(testing::mini_scene("mini_kitchen"), config(), 7);
  const std::string before = serialize(env.world());
  StepResult r = env.step(parse_command("(pick, arm=left, objectID=Kitchen_Cup_01)"));
  EXPECT_EQ(env.world().step_count, 1u);
  EXPECT_EQ(env.world().rng.position(), 1u);
  const std::string after = serialize(env.world());
  StepResult u = env.undo();
  EXPECT_TRUE(u.success);
  EXPECT_EQ(serialize(env.world()), before);
  StepResult re = env.redo();
  EXPECT_EQ(serialize(env.world()), after);
  EXPECT_EQ(re.outcome, r.outcome);
  EXPECT_EQ(re.success, r.success);
  EXPECT_EQ(re.message.rfind("replayed step 1", 0), 0u);
}

TEST(EnvironmentTest, UndoOnFreshEnvironment) {
  Environment env(testing::mini_scene("mini_kitchen"), config(), 0);
  StepResult r = env.step(parse_command("(undo)"));
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.violations.front().code, "nothing_to_undo");
  EXPECT_EQ(r.error_message->rfind("NothingToUndo: ", 0), 0u);
  EXPECT_EQ(env.world().step_count, 0u);
  EXPECT_EQ(env.step(parse_command("(redo)")).violations.front().code, "nothing_to_redo");
}

TEST(EnvironmentTest, LoadStateDoesNotStep) {
  Environment env(testing::mini_scene("mini_kitchen"), config(), 0);
  env.step(parse_command("(RotateLeft, Magnitude=1)"));
  StepResult r = env.step(parse_command("(loadstate)"));
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.feedback.at("step_count"), 1);
  EXPECT_EQ(env.world().step_count, 1u);
  EXPECT_EQ(env.history().size(), 2u);
}

TEST(EnvironmentTest, DisabledHistory) {
  EnvConfig c = config();
  c.record_history = false;
  Environment env(testing::mini_scene("mini_kitchen"), c, 0);
  env.step(parse_command("(RotateLeft, Magnitude=1)"));
  EXPECT_EQ(env.undo().violations.front().code, "undo_disabled");
  EXPECT_EQ(env.world().robot.heading, Heading::kW);
}

TEST(EnvironmentTest, ResetClearsHistory) {
  Environment env(testing::mini_scene("mini_kitchen"), config(), 0);
  env.step(parse_command("(RotateLeft, Magnitude=1)"));
  env.reset(9);
  EXPECT_EQ(env.world().step_count, 0u);
  EXPECT_EQ(env.world().rng.seed(), 9u);
  EXPECT_EQ(env.history().size(), 1u);
}

TEST(EnvironmentTest, ParallelCountsAsOneStep) {
  Environment env(testing::mini_scene("mini_kitchen"), config(), 0);
  ActionCommand l = parse_command("(pick, arm=left, objectID=Kitchen_Cup_01)");
  ActionCommand r = parse_command("(pick, arm=right, objectID=Kitchen_Cup_01)");
  auto [lr, rr] = env.step_parallel(l, r);
  EXPECT_EQ(rr.outcome, "conflict");
  EXPECT_EQ(env.world().step_count, 1u);
  EXPECT_EQ(env.history().size(), 2u);
}

TEST(EnvironmentTest, TaskStatusFollowsTheWorld) {
  SceneSpec scene = testing::mini_scene("mini_kitchen");
  TaskInstance task = select_task(load_scene(scene), "pick_Cup");
  Environment env(scene, config(RobotProfile::kX1, DifficultyLevel::easy()), 0, task);
  EXPECT_EQ(env.task_status(), TaskStatus::kInProgress);
  env.step(parse_command("(pick, arm=left, objectID=Kitchen_Cup_01)"));
  EXPECT_EQ(env.task_status(), TaskStatus::kSuccess);
  env.undo();
  EXPECT_EQ(env.task_status(), TaskStatus::kInProgress);
}

// Property: over random command sequences, undo then redo is the identity,
// redo then undo is the identity, and undoing k steps then replaying the same
// commands lands on the same bytes (the RNG position is part of the state).
TEST(ReplayPropertyTest, UndoRedoAndReplay) {
  const std::vector<std::string> scenes = {"mini_kitchen", "mini_cafe", "mini_bath"};
  std::mt19937_64 gen(99);
  for (int seq = 0; seq < 60; ++seq) {
    RobotProfile profile = seq % 2 ? RobotProfile::kH1 : RobotProfile::kX1;
    EnvConfig c = config(profile, seq % 3 ? DifficultyLevel::hard() : DifficultyLevel::medium());
    Environment env(testing::mini_scene(scenes[seq % 3]), c, seq);
    std::vector<ActionCommand> commands;
    std::vector<std::string> states = {serialize(env.world())};
    for (int i = 0; i < 20; ++i) {
      ActionCommand cmd = testing::random_valid_command(env.world(), c.exec, gen);
      env.step(cmd);
      commands.push_back(cmd);
      states.push_back(serialize(env.world()));

      const std::string now = states.back();
      ASSERT_TRUE(env.undo().success);
      ASSERT_EQ(serialize(env.world()), states[states.size() - 2]);
      env.redo();
      ASSERT_EQ(serialize(env.world()), now);
    }
    std::uniform_int_distribution<int> depth(1, 20);
    const int k = depth(gen);
    for (int i = 0; i < k; ++i) ASSERT_TRUE(env.undo().success);
    ASSERT_EQ(serialize(env.world()), states[states.size() - 1 - k]);
    for (int i = static_cast<int>(commands.size()) - k; i < static_cast<int>(commands.size()); ++i) {
      env.step(commands[i]);
      ASSERT_EQ(serialize(env.world()), states[i + 1]) << "replay diverged at " << i;
    }
  }
}

}  // namespace
}  // namespace dualhab
