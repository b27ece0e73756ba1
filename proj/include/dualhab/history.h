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

// Full-state snapshot history with a cursor. Undo and redo move the cursor
// and hand back the stored state; redo restores the recorded post-step
// snapshot instead of executing the action again.

#ifndef DUALHAB_HISTORY_H_
#define DUALHAB_HISTORY_H_

#include <cstdint>
#include <deque>
#include <optional>

#include "dualhab/actions.h"
#include "dualhab/world.h"
#include "json.hpp"

namespace dualhab {

inline constexpr std::size_t kDefaultHistoryCapacity = 64;

struct Snapshot {
  std::uint64_t step_index = 0;
  WorldState world;
  // Result of the step that produced this state; empty for the initial one.
  std::optional<StepResult> result;
};

class HistoryStack {
 public:
  explicit HistoryStack(std::size_t capacity = kDefaultHistoryCapacity);

  // Drops every snapshot and records `initial` as the only one.
  void reset(const WorldState& initial);
  // Discards the redo tail, appends, evicts the oldest beyond capacity.
  void record(const WorldState& world, const StepResult& result);
  // Throw NothingToUndo / NothingToRedo.
  const WorldState& undo();
  const WorldState& redo();

  bool can_undo() const { return cursor_ > 0; }
  bool can_redo() const { return cursor_ + 1 < snapshots_.size(); }
  const WorldState& current() const;
  std::size_t cursor() const { return cursor_; }
  std::size_t size() const { return snapshots_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<Snapshot>& snapshots() const { return snapshots_; }

  // {"capacity", "cursor", "snapshots": [{"step_index", "state", "result"}]}.
  nlohmann::json dump() const;

 private:
  std::size_t capacity_;
  std::deque<Snapshot> snapshots_;
  std::size_t cursor_ = 0;
};

}  // namespace dualhab

#endif  // DUALHAB_HISTORY_H_
