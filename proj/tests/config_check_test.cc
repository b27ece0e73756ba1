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

#include "dualhab/config_check.h"

#include <cstdlib>
#include <fstream>

#include <gtest/gtest.h>

#include "dualhab/error.h"
#include "support/test_paths.h"

namespace dualhab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class ScratchDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dualhab_cfg_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const json& doc) {
    fs::path p = dir_ / name;
    std::ofstream(p) << doc.dump(2);
    return p;
  }

  fs::path dir_;
};

TEST_F(ScratchDir, BundledPackIsClean) {
  const fs::path data = testing::repo_data_dir();
  std::vector<fs::path> files = {data / "contingency.json", data / "engine.json",
                                 data / "manifest.json"};
  for (const auto& e : fs::directory_iterator(data / "scenes")) files.push_back(e.path());
  for (const auto& e : fs::directory_iterator(data / "mini")) files.push_back(e.path());
  for (const fs::path& f : files) {
    auto issues = validate_file(f, data / "scenes");
    EXPECT_TRUE(issues.empty()) << f << ": " << (issues.empty() ? "" : issues[0].message);
  }
}

TEST_F(ScratchDir, RowNotSummingToOneIsRejected) {
  json doc = json::parse(R"({"IsPickedUp.Pick": {"success": 0.8, "broken": 0.17}})");
  auto issues = validate_file(write("bad.json", doc), testing::repo_data_dir() / "scenes");
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_NE(issues[0].message.find("IsPickedUp.Pick"), std::string::npos);
  EXPECT_NE(issues[0].message.find("0.97"), std::string::npos);
}

TEST_F(ScratchDir, ManifestWithMissingObject) {
  json doc = manifest_to_json(load_manifest(testing::repo_data_dir() / "manifest.json"));
  json& bindings = doc["tasks"][0]["bindings"];
  bindings[bindings.begin().key()] = "Kitchen_Unicorn_01";
  auto issues = validate_file(write("m.json", doc), testing::repo_data_dir() / "scenes");
  ASSERT_FALSE(issues.empty());
  EXPECT_NE(issues[0].message.find("Kitchen_Unicorn_01"), std::string::npos);
}

TEST_F(ScratchDir, UnparseableFile) {
  fs::path p = dir_ / "junk.json";
  std::ofstream(p) << "{ not json";
  EXPECT_FALSE(validate_file(p, testing::repo_data_dir() / "scenes").empty());
}

TEST(EngineConfigTest, DefaultsRoundTrip) {
  EngineConfig d = default_engine_config();
  EngineConfig back = engine_config_from_json(to_json(d));
  EXPECT_EQ(to_json(back), to_json(d));
  EXPECT_EQ(d.use_limit, 3);
  EXPECT_EQ(d.max_steps, 50);
  EXPECT_DOUBLE_EQ(d.robots.at(RobotProfile::kX1).reach_radius, 1.0);
  EXPECT_DOUBLE_EQ(d.robots.at(RobotProfile::kH1).reach_radius, 1.5);
  EXPECT_EQ(to_json(load_engine_config(testing::repo_data_dir() / "engine.json")), to_json(d));
}

TEST(EngineConfigTest, PartialDocumentKeepsDefaults) {
  EngineConfig c = engine_config_from_json(json::parse(R"({"use_limit": 5})"));
  EXPECT_EQ(c.use_limit, 5);
  EXPECT_EQ(c.history_capacity, kDefaultHistoryCapacity);
}

TEST(EngineConfigTest, BadValuesThrow) {
  EXPECT_THROW(engine_config_from_json(json::parse(R"({"history_capacity": 0})")), ConfigError);
  EXPECT_THROW(engine_config_from_json(json::parse(R"({"use_limit": "three"})")), ConfigError);
}

TEST(EngineConfigTest, DetectKind) {
  EXPECT_EQ(detect_kind(json::parse(R"({"scene_id": "a"})")), ConfigKind::kScene);
  EXPECT_EQ(detect_kind(json::parse(R"({"tasks": []})")), ConfigKind::kManifest);
  EXPECT_EQ(detect_kind(json::parse(R"({"use_limit": 1})")), ConfigKind::kEngine);
  EXPECT_EQ(detect_kind(json::parse(R"({"IsOpen.Open": {}})")), ConfigKind::kContingency);
  EXPECT_EQ(detect_kind(json(3)), ConfigKind::kUnknown);
}

TEST(ResolveSceneTest, ByIdOrPath) {
  EXPECT_EQ(resolve_scene("kitchen_01", testing::repo_data_dir() / "scenes").scene_id,
            "kitchen_01");
  fs::path file = testing::repo_data_dir() / "mini" / "mini_cafe.json";
  EXPECT_EQ(resolve_scene(file.string()).scene_id, "mini_cafe");
  EXPECT_THROW(resolve_scene("kitchen_77", testing::repo_data_dir() / "scenes"), Error);
}

}  // namespace
}  // namespace dualhab
