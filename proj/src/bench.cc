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

#include "dualhab/bench.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dualhab/agents.h"
#include "dualhab/error.h"

namespace dualhab {
namespace {

std::string percent(const RateCell& c) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * c.rate());
  return buf;
}

std::string rate_text(const RateCell& c) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", c.rate());
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::map<CellKey, RateCell> rates_by(const BenchReport& report, bool by_category) {
  std::map<CellKey, RateCell> out;
  for (const auto& t : report.trials) {
    CellKey key{by_category ? std::string(to_string(t.category)) : t.template_name,
                std::string(to_string(t.robot)), t.difficulty};
    RateCell& cell = out[key];
    ++cell.trials;
    if (t.status == TaskStatus::kSuccess) ++cell.successes;
  }
  return out;
}

}  // namespace

BenchReport run_bench(const Manifest& manifest, const std::vector<SceneSpec>& scenes,
                      const BenchConfig& config, const ProgressFn& progress) {
  std::map<std::string, const SceneSpec*> by_id;
  for (const auto& s : scenes) by_id[s.scene_id] = &s;

  BenchReport report;
  const std::size_t total = manifest.tasks.size() * config.robots.size() *
                            config.difficulties.size() * static_cast<std::size_t>(config.trials);
  std::size_t done = 0;
  for (const auto& task : manifest.tasks) {
    auto it = by_id.find(task.scene_id);
    if (it == by_id.end()) {
      report.missing.push_back(task.task_id);
      done += total / std::max<std::size_t>(1, manifest.tasks.size());
      continue;
    }
    for (RobotProfile robot : config.robots) {
      for (const DifficultyLevel& level : config.difficulties) {
        EnvConfig env = make_env_config(config.engine, robot, level, config.table);
        env.record_history = false;
        env.exec.attach_feedback = false;
        env.exec.solve_kinematics = !config.fast;
        for (int i = 0; i < config.trials; ++i) {
          const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(i);
          TrialRecord rec;
          rec.task_id = task.task_id;
          rec.template_name = task.template_name;
          rec.category = classify(task);
          rec.robot = robot;
          rec.difficulty = to_string(level);
          rec.trial = i;
          rec.seed = seed;
          try {
            auto agent = make_agent(config.agent);
            EpisodeReport ep = run_episode(*it->second, task, *agent, env, seed,
                                           config.max_steps, /*keep_transcript=*/false);
            rec.status = ep.status;
            rec.steps = ep.steps;
          } catch (const Error& e) {
            report.missing.push_back(task.task_id + ": " + e.what());
            rec.status = TaskStatus::kFailed;
          }
          report.trials.push_back(std::move(rec));
          if (progress) progress(++done, total);
        }
      }
    }
  }
  return report;
}

std::map<CellKey, RateCell> category_rates(const BenchReport& report) {
  return rates_by(report, true);
}

std::map<CellKey, RateCell> template_rates(const BenchReport& report) {
  return rates_by(report, false);
}

nlohmann::json bench_to_json(const BenchReport& report, const BenchConfig& config) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& [key, c] : category_rates(report)) {
    cells.push_back({{"category", std::get<0>(key)},
                     {"robot", std::get<1>(key)},
                     {"difficulty", std::get<2>(key)},
                     {"successes", c.successes},
                     {"trials", c.trials},
                     {"rate", c.rate()}});
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [key, c] : template_rates(report)) {
    rows.push_back({{"template", std::get<0>(key)},
                    {"robot", std::get<1>(key)},
                    {"difficulty", std::get<2>(key)},
                    {"successes", c.successes},
                    {"trials", c.trials},
                    {"rate", c.rate()}});
  }
  nlohmann::json difficulties = nlohmann::json::array();
  for (const auto& d : config.difficulties) difficulties.push_back(to_string(d));
  nlohmann::json robots = nlohmann::json::array();
  for (RobotProfile r : config.robots) robots.push_back(std::string(to_string(r)));
  return {{"agent", config.agent},
          {"trials", config.trials},
          {"base_seed", config.base_seed},
          {"max_steps", config.max_steps},
          {"robots", robots},
          {"difficulties", difficulties},
          {"categories", cells},
          {"templates", rows},
          {"missing", report.missing}};
}

std::string bench_to_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "category,robot,difficulty,successes,trials,rate\n";
  for (const auto& [key, c] : category_rates(report)) {
    out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
        << c.successes << ',' << c.trials << ',' << rate_text(c) << '\n';
  }
  return out.str();
}

std::string bench_text_table(const BenchReport& report, const BenchConfig& config) {
  auto cells = category_rates(report);
  std::vector<std::pair<std::string, std::string>> columns;
  for (RobotProfile r : config.robots) {
    for (const auto& d : config.difficulties) {
      columns.emplace_back(std::string(to_string(r)), to_string(d));
    }
  }
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-18s", "category");
  out << buf;
  for (const auto& [r, d] : columns) {
    std::snprintf(buf, sizeof(buf), " %12s", (r + "/" + d).c_str());
    out << buf;
  }
  out << '\n';
  for (TaskCategory cat : {TaskCategory::kSingleArm, TaskCategory::kDualArmOptional,
                           TaskCategory::kDualArmEssential}) {
    std::snprintf(buf, sizeof(buf), "%-18s", std::string(to_string(cat)).c_str());
    out << buf;
    for (const auto& [r, d] : columns) {
      auto it = cells.find({std::string(to_string(cat)), r, d});
      std::string v = it == cells.end() ? "-" : percent(it->second);
      std::snprintf(buf, sizeof(buf), " %12s", v.c_str());
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string trial_log_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "task_id,template,category,robot,difficulty,trial,seed,status,steps\n";
  for (const auto& t : report.trials) {
    out << t.task_id << ',' << t.template_name << ',' << to_string(t.category) << ','
        << to_string(t.robot) << ',' << t.difficulty << ',' << t.trial << ',' << t.seed << ','
        << to_string(t.status) << ',' << t.steps << '\n';
  }
  return out.str();
}

void write_bench_outputs(const BenchReport& report, const BenchConfig& config,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "bench.json", bench_to_json(report, config).dump(2) + "\n");
  write_file(dir / "bench.csv", bench_to_csv(report));
  write_file(dir / "bench.txt", bench_text_table(report, config));
  write_file(dir / "trials.csv", trial_log_csv(report));
}

}  // namespace dualhab
