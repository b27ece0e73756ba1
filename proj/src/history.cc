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

#include "dualhab/error.h"

namespace dualhab {

HistoryStack::HistoryStack(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw ConfigError("history capacity must be at least 1");
}

void HistoryStack::reset(const WorldState& initial) {
  snapshots_.clear();
  snapshots_.push_back(Snapshot{initial.step_count, initial, std::nullopt});
  cursor_ = 0;
}

void HistoryStack::record(const WorldState& world, const StepResult& result) {
  if (snapshots_.empty()) {
    reset(world);
    return;
  }
  snapshots_.erase(snapshots_.begin() + static_cast<std::ptrdiff_t>(cursor_) + 1,
                   snapshots_.end());
  snapshots_.push_back(Snapshot{world.step_count, world, result});
  while (snapshots_.size() > capacity_) snapshots_.pop_front();
  cursor_ = snapshots_.size() - 1;
}

const WorldState& HistoryStack::undo() {
  if (!can_undo()) throw NothingToUndo("no earlier state in the history");
  --cursor_;
  return snapshots_[cursor_].world;
}

const WorldState& HistoryStack::redo() {
  if (!can_redo()) throw NothingToRedo("no undone step to redo");
  ++cursor_;
  return snapshots_[cursor_].world;
}

const WorldState& HistoryStack::current() const {
  if (snapshots_.empty()) throw NothingToUndo("history is empty");
  return snapshots_[cursor_].world;
}

nlohmann::json HistoryStack::dump() const {
  nlohmann::json j;
  j["capacity"] = capacity_;
  j["cursor"] = cursor_;
  j["snapshots"] = nlohmann::json::array();
  for (const Snapshot& s : snapshots_) {
    nlohmann::json entry;
    entry["step_index"] = s.step_index;
    entry["state"] = to_json(s.world);
    entry["result"] = s.result ? to_json(*s.result) : nlohmann::json(nullptr);
    j["snapshots"].push_back(std::move(entry));
  }
  return j;
}

}  // namespace dualhab
