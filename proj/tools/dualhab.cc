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

// dualhab: run episodes, benchmark batches, validate configs, serve the step
// protocol.

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dualhab/agents.h"
#include "dualhab/bench.h"
#include "dualhab/config_check.h"
#include "dualhab/error.h"
#include "dualhab/server.h"
#include "dualhab/tasks.h"

namespace {

using namespace dualhab;

constexpr int kConfigExit = 2;

struct Common {
  std::string config_path;
  std::string contingency_path;
  std::string scene_dir = default_scene_dir().string();
  std::string manifest_path;
};

EngineConfig engine_of(const Common& c) {
  return c.config_path.empty() ? default_engine_config() : load_engine_config(c.config_path);
}

ContingencyTable table_of(const Common& c) {
  return c.contingency_path.empty() ? ContingencyTable::defaults()
                                    : load_contingency_file(c.contingency_path);
}

std::optional<Manifest> manifest_of(const Common& c, bool use_default) {
  if (!c.manifest_path.empty()) return load_manifest(c.manifest_path);
  if (use_default && std::filesystem::exists(default_manifest_path())) {
    return load_manifest(default_manifest_path());
  }
  return std::nullopt;
}

DifficultyLevel difficulty_of(const std::string& s) {
  auto d = parse_difficulty(s);
  if (!d) throw ConfigError("unknown difficulty '" + s + "'");
  return *d;
}

RobotProfile robot_of(const std::string& s) {
  auto r = parse_profile(s);
  if (!r) throw ConfigError("unknown robot '" + s + "'");
  return *r;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Engine config JSON");
  cmd->add_option("--contingency", c.contingency_path, "Contingency table overrides (JSON)");
  cmd->add_option("--scenes", c.scene_dir, "Scene directory")->capture_default_str();
  cmd->add_option("--manifest", c.manifest_path, "Task manifest (JSON)");
}

// ---------------------------------------------------------------------------

struct RunArgs {
  std::string scene;
  std::string robot = "x1";
  std::string task;
  std::string agent = "greedy";
  std::string difficulty = "easy";
  std::uint64_t seed = 0;
  int max_steps = -1;
  std::string out;
};

int cmd_run(const Common& c, const RunArgs& a) {
  EngineConfig engine = engine_of(c);
  SceneSpec scene = resolve_scene(a.scene, c.scene_dir);
  auto manifest = manifest_of(c, true);
  WorldState initial = load_scene(scene);
  TaskInstance task = select_task(initial, a.task, manifest ? &*manifest : nullptr);
  EnvConfig env = make_env_config(engine, robot_of(a.robot), difficulty_of(a.difficulty),
                                  table_of(c));
  env.record_history = false;
  auto agent = make_agent(a.agent);
  const int max_steps = a.max_steps > 0 ? a.max_steps : engine.max_steps;
  EpisodeReport rep = run_episode(scene, task, *agent, env, a.seed, max_steps);
  std::string text = to_json(rep).dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream(a.out) << text;
  }
  return 0;
}

struct BenchArgs {
  std::vector<std::string> robots = {"x1", "h1"};
  std::vector<std::string> difficulties = {"easy", "medium", "hard"};
  std::string agent = "greedy";
  int trials = 50;
  std::uint64_t seed = 0;
  int max_steps = -1;
  std::string out = "bench_out";
  std::string template_filter;
  std::string category_filter;
  bool fast = false;
  bool quiet = false;
};

int cmd_bench(const Common& c, const BenchArgs& a) {
  BenchConfig cfg;
  cfg.engine = engine_of(c);
  cfg.table = table_of(c);
  cfg.agent = a.agent;
  make_agent(a.agent);  // reject unknown names before the run
  cfg.trials = a.trials;
  cfg.base_seed = a.seed;
  cfg.max_steps = a.max_steps > 0 ? a.max_steps : cfg.engine.max_steps;
  cfg.fast = a.fast;
  cfg.robots.clear();
  for (const auto& r : a.robots) cfg.robots.push_back(robot_of(r));
  cfg.difficulties.clear();
  for (const auto& d : a.difficulties) cfg.difficulties.push_back(difficulty_of(d));

  auto manifest = manifest_of(c, true);
  if (!manifest) throw ConfigError("no manifest given and none bundled");
  if (!a.template_filter.empty() || !a.category_filter.empty()) {
    std::optional<TaskCategory> cat;
    if (!a.category_filter.empty()) {
      cat = parse_category(a.category_filter);
      if (!cat) throw ConfigError("unknown category '" + a.category_filter + "'");
    }
    std::string tmpl =
        a.template_filter.empty() ? "" : find_template(a.template_filter).name;
    Manifest filtered;
    for (const auto& t : manifest->tasks) {
      if (!tmpl.empty() && t.template_name != tmpl) continue;
      if (cat && classify(t) != *cat) continue;
      filtered.tasks.push_back(t);
    }
    manifest = filtered;
  }
  std::vector<SceneSpec> scenes = load_scene_dir(c.scene_dir);
  ProgressFn progress;
  if (!a.quiet) {
    progress = [](std::size_t done, std::size_t total) {
      if (done % 500 == 0 || done == total) {
        std::cerr << "\r" << done << "/" << total << " trials" << std::flush;
        if (done == total) std::cerr << "\n";
      }
    };
  }
  BenchReport report = run_bench(*manifest, scenes, cfg, progress);
  write_bench_outputs(report, cfg, a.out);
  std::cout << bench_text_table(report, cfg);
  for (const auto& m : report.missing) std::cerr << "missing: " << m << "\n";
  return 0;
}

int cmd_validate(const Common& c, const std::vector<std::string>& files) {
  std::vector<std::filesystem::path> paths;
  if (files.empty()) {
    for (const auto& entry : std::filesystem::directory_iterator(c.scene_dir)) {
      if (entry.path().extension() == ".json") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const char* name : {"manifest.json", "engine.json", "contingency.json"}) {
      auto p = data_dir() / name;
      if (std::filesystem::exists(p)) paths.push_back(p);
    }
  } else {
    for (const auto& f : files) paths.emplace_back(f);
  }
  int problems = 0;
  for (const auto& p : paths) {
    auto issues = validate_file(p, c.scene_dir);
    if (issues.empty()) {
      std::cout << "ok     " << p.string() << "\n";
    }
    for (const auto& i : issues) {
      std::cout << "error  " << i.file << ": " << i.message << "\n";
      ++problems;
    }
  }
  return problems == 0 ? 0 : 1;
}

int cmd_serve(const Common& c, const std::string& host, int port) {
  ServerConfig cfg;
  cfg.host = host;
  cfg.port = port;
  cfg.engine = engine_of(c);
  cfg.table = table_of(c);
  cfg.scene_dir = c.scene_dir;
  cfg.manifest = manifest_of(c, true);
  Server server(cfg);
  server.start();
  std::cerr << "dualhab listening on " << host << ":" << server.port() << "\n";
  server.wait();
  return 0;
}

int cmd_manifest(const Common& c, const std::string& out, bool check) {
  if (check) {
    Manifest m = load_manifest(c.manifest_path.empty() ? default_manifest_path().string()
                                                       : c.manifest_path);
    auto counts = count_by_template(m);
    int total = 0;
    bool ok = true;
    for (const auto& t : task_templates()) {
      int n = counts[t.name];
      total += n;
      ok = ok && n == t.manifest_count;
      std::printf("%-18s %-58s %4d / %4d\n", std::string(to_string(t.category)).c_str(),
                  t.title.c_str(), n, t.manifest_count);
    }
    std::printf("%-77s %4d / %4d\n", "total", total, manifest_total());
    auto problems = validate_manifest(m, load_scene_dir(c.scene_dir));
    for (const auto& p : problems) std::cout << "error  " << p << "\n";
    return ok && problems.empty() ? 0 : 1;
  }
  Manifest m = generate_manifest(load_scene_dir(c.scene_dir));
  std::string text = manifest_to_json(m).dump(1) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream(out) << text;
  }
  return 0;
}

int cmd_tasks(const Common& c, const std::string& scene_name) {
  SceneSpec scene = resolve_scene(scene_name, c.scene_dir);
  std::vector<std::string> skipped;
  for (const auto& t : instantiate_all(load_scene(scene), &skipped)) {
    std::cout << to_string(classify(t)) << "  " << t.task_id << "\n";
  }
  for (const auto& s : skipped) std::cout << "skipped  " << s << " (no binding)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dualhab: headless dual-arm household simulator"};
  app.require_subcommand(0, 1);

  Common common;
  RunArgs run;
  BenchArgs bench;
  std::vector<std::string> files;
  std::string host = "127.0.0.1";
  int port = default_port();
  std::string manifest_out;
  bool manifest_check = false;
  std::string tasks_scene;
  bool serve_flag = false;

  app.add_flag("--serve", serve_flag, "Same as the serve subcommand");
  app.add_option("--port", port, "Server port (DUALHAB_PORT)");

  auto* run_cmd = app.add_subcommand("run", "Run one episode and print its JSON");
  add_common(run_cmd, common);
  run_cmd->add_option("--scene", run.scene, "Scene id or file")->required();
  run_cmd->add_option("--robot", run.robot, "x1 or h1")->capture_default_str();
  run_cmd->add_option("--task", run.task, "Task id, template, or alias like pick_cup")->required();
  run_cmd->add_option("--agent", run.agent, "greedy or random")->capture_default_str();
  run_cmd->add_option("--difficulty", run.difficulty, "easy|medium|hard|base|custom=<p>")
      ->capture_default_str();
  run_cmd->add_option("--seed", run.seed)->capture_default_str();
  run_cmd->add_option("--max-steps", run.max_steps, "Defaults to the engine config");
  run_cmd->add_option("--out", run.out, "Write the episode JSON here");

  auto* bench_cmd = app.add_subcommand("bench", "Seeded benchmark over the manifest");
  add_common(bench_cmd, common);
  bench_cmd->add_option("--robot", bench.robots, "Robots to run")->capture_default_str();
  bench_cmd->add_option("--difficulty", bench.difficulties)->capture_default_str();
  bench_cmd->add_option("--agent", bench.agent)->capture_default_str();
  bench_cmd->add_option("--trials", bench.trials)->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "Base seed; trial i uses seed + i")
      ->capture_default_str();
  bench_cmd->add_option("--max-steps", bench.max_steps);
  bench_cmd->add_option("--out", bench.out, "Report directory")->capture_default_str();
  bench_cmd->add_option("--template", bench.template_filter, "Only this template");
  bench_cmd->add_option("--category", bench.category_filter, "Only this category");
  bench_cmd->add_flag("--fast", bench.fast, "Skip inverse kinematics during trials");
  bench_cmd->add_flag("--quiet", bench.quiet);

  auto* validate_cmd = app.add_subcommand("validate", "Check scenes, manifests and configs");
  add_common(validate_cmd, common);
  validate_cmd->add_option("files", files, "Files to check (default: bundled data)");

  auto* serve_cmd = app.add_subcommand("serve", "Serve the step protocol over TCP");
  add_common(serve_cmd, common);
  serve_cmd->add_option("--host", host)->capture_default_str();
  serve_cmd->add_option("--port", port, "Port (DUALHAB_PORT)")->capture_default_str();

  auto* manifest_cmd = app.add_subcommand("manifest", "Generate or check the task manifest");
  add_common(manifest_cmd, common);
  manifest_cmd->add_option("--out", manifest_out, "Write the generated manifest here");
  manifest_cmd->add_flag("--check", manifest_check, "Print per-template counts and validate");

  auto* tasks_cmd = app.add_subcommand("tasks", "List every task binding of a scene");
  add_common(tasks_cmd, common);
  tasks_cmd->add_option("--scene", tasks_scene)->required();

  CLI11_PARSE(app, argc, argv);
  std::signal(SIGPIPE, SIG_IGN);

  try {
    if (*run_cmd) return cmd_run(common, run);
    if (*bench_cmd) return cmd_bench(common, bench);
    if (*validate_cmd) return cmd_validate(common, files);
    if (*serve_cmd || serve_flag) return cmd_serve(common, host, port);
    if (*manifest_cmd) return cmd_manifest(common, manifest_out, manifest_check);
    if (*tasks_cmd) return cmd_tasks(common, tasks_scene);
  } catch (const dualhab::Error& e) {
    std::cerr << "dualhab: " << e.kind() << ": " << e.what() << "\n";
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "dualhab: " << e.what() << "\n";
    return kConfigExit;
  }
  std::cout << app.help();
  return 0;
}
