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

// Runs the dualhab binary as a subprocess.

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"
#include "support/test_paths.h"

namespace dualhab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Invocation {
  int code = -1;
  std::string out;
};

Invocation run(const std::string& args) {
  const std::string cmd = testing::cli_path().string() + " " + args + " 2>/dev/null";
  Invocation r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("dualhab_cli_") +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

constexpr const char* kPickCup =
    "run --scene kitchen_01 --robot x1 --task pick_cup --agent greedy --difficulty easy "
    "--seed 7 --max-steps 50";

TEST_F(CliTest, RunSucceedsAndIsDeterministic) {
  Invocation a = run(kPickCup);
  Invocation b = run(kPickCup);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  json doc = json::parse(a.out);
  EXPECT_EQ(doc.at("status"), "Success");
  EXPECT_EQ(doc.at("seed"), 7);
  EXPECT_LE(doc.at("steps").get<int>(), 50);
}

TEST_F(CliTest, RunWritesOutFile) {
  fs::path out = dir_ / "episode.json";
  Invocation r = run(std::string(kPickCup) + " --out " + out.string());
  ASSERT_EQ(r.code, 0);
  std::ifstream in(out);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(text, run(kPickCup).out);
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("run --scene attic_9 --task pick").code, 2);
  EXPECT_EQ(run("run --scene kitchen_01 --task pick --difficulty weird").code, 2);
  EXPECT_EQ(run("run --scene kitchen_01 --task juggle_cup").code, 2);
  EXPECT_NE(run("run --task pick").code, 0);
}

TEST_F(CliTest, Validate) {
  EXPECT_EQ(run("validate").code, 0);
  fs::path bad = dir_ / "table.json";
  std::ofstream(bad) << R"({"IsOpen.Open": {"success": 0.5}})";
  Invocation r = run("validate " + bad.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("IsOpen.Open"), std::string::npos);
}

TEST_F(CliTest, ManifestCheckAndRegeneration) {
  Invocation check = run("manifest --check");
  EXPECT_EQ(check.code, 0);
  EXPECT_NE(check.out.find("359 /  359"), std::string::npos);
  fs::path out = dir_ / "manifest.json";
  ASSERT_EQ(run("manifest --out " + out.string()).code, 0);
  std::ifstream a(out);
  std::ifstream b(testing::repo_data_dir() / "manifest.json");
  EXPECT_EQ(json::parse(a), json::parse(b));
}

TEST_F(CliTest, BenchWritesReports) {
  Invocation r = run("bench --template pick_objects --robot x1 --difficulty easy --trials 2 --quiet "
              "--out " + dir_.string());
  ASSERT_EQ(r.code, 0);
  for (const char* f : {"bench.json", "bench.csv", "bench.txt", "trials.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  }
  std::ifstream in(dir_ / "bench.json");
  json doc = json::parse(in);
  ASSERT_EQ(doc.at("categories").size(), 1u);
  EXPECT_EQ(doc.at("categories")[0].at("trials"), 20 * 2);
}

TEST_F(CliTest, TasksListing) {
  Invocation r = run("tasks --scene kitchen_01");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("kitchen_01:pick_objects:Kitchen_Cup_01"), std::string::npos);
}

}  // namespace
}  // namespace dualhab
