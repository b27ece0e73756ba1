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

// Seeded benchmark batches over a manifest and the success-rate reports
// built from them. Trial i of every cell runs with seed base_seed + i.

#ifndef DUALHAB_BENCH_H_
#define DUALHAB_BENCH_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "dualhab/config_check.h"
#include "dualhab/contingency.h"
#include "dualhab/tasks.h"
#include "json.hpp"

namespace dualhab {

struct BenchConfig {
  std::string agent = "greedy";
  std::vector<RobotProfile> robots = {RobotProfile::kX1, RobotProfile::kH1};
  std::vector<DifficultyLevel> difficulties = {DifficultyLevel::easy(), DifficultyLevel::medium(),
                                               DifficultyLevel::hard()};
  int trials = 50;
  std::uint64_t base_seed = 0;
  int max_steps = 50;
  EngineConfig engine = default_engine_config();
  ContingencyTable table = ContingencyTable::defaults();
  // Skip inverse kinematics during trials. Reachability is still checked.
  bool fast = false;
};

struct TrialRecord {
  std::string task_id;
  std::string template_name;
  TaskCategory category = TaskCategory::kSingleArm;
  RobotProfile robot = RobotProfile::kX1;
  std::string difficulty;
  int trial = 0;
  std::uint64_t seed = 0;
  TaskStatus status = TaskStatus::kInProgress;
  int steps = 0;
};

struct BenchReport {
  std::vector<TrialRecord> trials;
  // Tasks whose scene could not be found or loaded.
  std::vector<std::string> missing;
};

struct RateCell {
  int successes = 0;
  int trials = 0;
  double rate() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / trials; }
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

BenchReport run_bench(const Manifest& manifest, const std::vector<SceneSpec>& scenes,
                      const BenchConfig& config, const ProgressFn& progress = nullptr);

// Keyed by (category, robot, difficulty) and by (template, robot, difficulty).
using CellKey = std::tuple<std::string, std::string, std::string>;
std::map<CellKey, RateCell> category_rates(const BenchReport& report);
std::map<CellKey, RateCell> template_rates(const BenchReport& report);

nlohmann::json bench_to_json(const BenchReport& report, const BenchConfig& config);
std::string bench_to_csv(const BenchReport& report);
std::string bench_text_table(const BenchReport& report, const BenchConfig& config);
// One line per trial, the source for recomputing every rate.
std::string trial_log_csv(const BenchReport& report);

// bench.json, bench.csv, bench.txt and trials.csv under `dir`.
void write_bench_outputs(const BenchReport& report, const BenchConfig& config,
                         const std::filesystem::path& dir);

}  // namespace dualhab

#endif  // DUALHAB_BENCH_H_
