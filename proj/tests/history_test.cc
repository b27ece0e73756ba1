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

#include "dualhab/history.h"

#include <gtest/gtest.h>

#include "dualhab/error.h"
#include "support/test_paths.h"

namespace dualhab {
namespace {

WorldState at_step(const WorldState& base, std::uint64_t step) {
  WorldState w = base;
  w.step_count = step;
  w.robot.heading = rotate_heading(base.robot.heading, static_cast<int>(step));
  return w;
}

class HistoryStackTest : public ::testing::Test {
 protected:
  WorldState base_ = load_scene(testing::mini_scene("mini_kitchen"));
};

TEST_F(HistoryStackTest, RecordAppendsAndMovesCursor) {
  HistoryStack h;
  h.reset(base_);
  EXPECT_EQ(h.size(), 1u);
  EXPECT_FALSE(h.can_undo());
  h.record(at_step(base_, 1), StepResult{});
  EXPECT_EQ(h.size(), 2u);
  EXPECT_EQ(h.cursor(), 1u);
  EXPECT_EQ(h.current(), at_step(base_, 1));
  EXPECT_EQ(h.capacity(), kDefaultHistoryCapacity);
}

TEST_F(HistoryStackTest, UndoRedoWalkTheStack) {
  HistoryStack h;
  h.reset(base_);
  h.record(at_step(base_, 1), StepResult{});
  h.record(at_step(base_, 2), StepResult{});
  EXPECT_EQ(h.undo(), at_step(base_, 1));
  EXPECT_EQ(h.undo(), base_);
  EXPECT_THROW(h.undo(), NothingToUndo);
  EXPECT_EQ(h.redo(), at_step(base_, 1));
  EXPECT_EQ(h.redo(), at_step(base_, 2));
  EXPECT_THROW(h.redo(), NothingToRedo);
}

TEST_F(HistoryStackTest, NewBranchDropsRedoTail) {
  HistoryStack h;
  h.reset(base_);
  h.record(at_step(base_, 1), StepResult{});
  h.record(at_step(base_, 2), StepResult{});
  h.undo();
  WorldState branch = at_step(base_, 2);
  branch.robot.posture = Posture::kCrouch;
  h.record(branch, StepResult{});
  EXPECT_EQ(h.size(), 3u);
  EXPECT_FALSE(h.can_redo());
  EXPECT_EQ(h.current(), branch);
  for (std::size_t i = 1; i < h.size(); ++i) {
    EXPECT_LT(h.snapshots()[i - 1].step_index, h.snapshots()[i].step_index);
  }
}

TEST_F(HistoryStackTest, EvictsOldestBeyondCapacity) {
  HistoryStack h(3);
  h.reset(base_);
  for (std::uint64_t s = 1; s <= 4; ++s) h.record(at_step(base_, s), StepResult{});
  EXPECT_EQ(h.size(), 3u);
  EXPECT_EQ(h.snapshots().front().step_index, 2u);
  h.undo();
  h.undo();
  EXPECT_THROW(h.undo(), NothingToUndo);
  EXPECT_EQ(h.current(), at_step(base_, 2));
}

TEST_F(HistoryStackTest, CapacityMustBePositive) {
  EXPECT_THROW(HistoryStack(0), ConfigError);
}

TEST_F(HistoryStackTest, DumpListsSnapshots) {
  HistoryStack h(8);
  h.reset(base_);
  StepResult r;
  r.success = true;
  r.outcome = "ok";
  h.record(at_step(base_, 1), r);
  nlohmann::json d = h.dump();
  EXPECT_EQ(d.at("capacity"), 8);
  EXPECT_EQ(d.at("cursor"), 1);
  ASSERT_EQ(d.at("snapshots").size(), 2u);
  EXPECT_TRUE(d.at("snapshots")[0].at("result").is_null());
  EXPECT_EQ(d.at("snapshots")[1].at("result").at("outcome"), "ok");
  EXPECT_EQ(world_from_json(d.at("snapshots")[1].at("state")), at_step(base_, 1));
}

}  // namespace
}  // namespace dualhab
