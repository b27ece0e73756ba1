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

#include "dualhab/contingency.h"

#include <map>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "dualhab/error.h"
#include "dualhab/world.h"

namespace dualhab {
namespace {

OutcomeDistribution dist(std::initializer_list<std::pair<const char*, double>> entries) {
  OutcomeDistribution d;
  for (const auto& [n, p] : entries) d.entries.emplace_back(n, p);
  return d;
}

// Pearson statistic of `n` samples against the distribution's own masses.
double chi_squared_statistic(const OutcomeDistribution& d, StreamRng& rng, int n) {
  std::map<std::string, int> counts;
  for (int i = 0; i < n; ++i) ++counts[sample_outcome(d, rng)];
  double stat = 0.0;
  for (const auto& [name, p] : d.entries) {
    double expected = p * n;
    double diff = counts[name] - expected;
    stat += diff * diff / expected;
  }
  return stat;
}

TEST(SampleOutcomeTest, DefaultRowsPassChiSquared) {
  constexpr int kSamples = 100000;
  std::uint64_t seed = 1;
  const ContingencyTable table = ContingencyTable::defaults();
  for (const auto& [key, d] : table.rows()) {
    for (const DifficultyLevel& level : {DifficultyLevel::base(), DifficultyLevel::medium(),
                                         DifficultyLevel::hard()}) {
      OutcomeDistribution scaled = scale_difficulty(d, level);
      StreamRng rng(seed++);
      double stat = chi_squared_statistic(scaled, rng, kSamples);
      boost::math::chi_squared chi(static_cast<double>(scaled.entries.size() - 1));
      double critical = boost::math::quantile(boost::math::complement(chi, 0.001));
      EXPECT_LT(stat, critical) << key << " at " << to_string(level);
    }
  }
}

TEST(SampleOutcomeTest, PourableCupFrequencies) {
  const ContingencyTable table = ContingencyTable::defaults();
  const OutcomeDistribution* d = table.find(StateFlag::kIsFilled, ActionKind::kPick);
  ASSERT_NE(d, nullptr);
  StreamRng rng(2024);
  std::map<std::string, int> counts;
  constexpr int kSamples = 100000;
  for (int i = 0; i < kSamples; ++i) ++counts[sample_outcome(*d, rng)];
  EXPECT_NEAR(counts["success"] / double(kSamples), 0.8, 0.01);
  EXPECT_NEAR(counts["liquid_spill"] / double(kSamples), 0.1, 0.01);
  EXPECT_NEAR(counts["broken"] / double(kSamples), 0.1, 0.01);
  EXPECT_EQ(counts.size(), 3u);
}

TEST(SampleOutcomeTest, ConsumesExactlyOneVariate) {
  StreamRng rng(5);
  OutcomeDistribution d = dist({{"success", 0.8}, {"broken", 0.2}});
  for (int i = 1; i <= 10; ++i) {
    sample_outcome(d, rng);
    EXPECT_EQ(rng.position(), static_cast<std::uint64_t>(i));
  }
  sample_outcome(OutcomeDistribution::certain_success(), rng);
  EXPECT_EQ(rng.position(), 11u);
}

TEST(SampleOutcomeTest, SameSeedSameSequence) {
  OutcomeDistribution d = ContingencyTable::defaults().rows().at("IsOpen.Open");
  StreamRng a(77), b(77);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_outcome(d, a), sample_outcome(d, b));
}

TEST(OutcomeAtTest, InverseCdf) {
  OutcomeDistribution d = dist({{"success", 0.8}, {"liquid_spill", 0.1}, {"broken", 0.1}});
  EXPECT_EQ(outcome_at(d, 0.0), "success");
  EXPECT_EQ(outcome_at(d, 0.79), "success");
  EXPECT_EQ(outcome_at(d, 0.85), "liquid_spill");
  EXPECT_EQ(outcome_at(d, 0.95), "broken");
  EXPECT_EQ(outcome_at(d, 0.9999999999), "broken");
}

TEST(OutcomeAtTest, SkipsZeroMassEntries) {
  OutcomeDistribution d = dist({{"success", 0.0}, {"broken", 1.0}});
  EXPECT_EQ(outcome_at(d, 0.0), "broken");
}

TEST(ScaleDifficultyTest, ProportionalRule) {
  OutcomeDistribution base = dist({{"success", 0.8}, {"liquid_spill", 0.1}, {"broken", 0.1}});
  OutcomeDistribution medium = scale_difficulty(base, DifficultyLevel::medium());
  EXPECT_EQ(medium, dist({{"success", 0.5}, {"liquid_spill", 0.25}, {"broken", 0.25}}));
  OutcomeDistribution hard = scale_difficulty(base, DifficultyLevel::hard());
  EXPECT_EQ(hard.entries.size(), 3u);
  EXPECT_EQ(hard.probability("success"), 0.2);
  EXPECT_EQ(hard.probability("liquid_spill"), 0.4);
  EXPECT_EQ(hard.probability("broken"), 0.4);
  EXPECT_EQ(scale_difficulty(base, DifficultyLevel::easy()), dist({{"success", 1.0}}));
}

TEST(ScaleDifficultyTest, UnevenFailuresKeepTheirRatio) {
  OutcomeDistribution base = dist({{"success", 0.7}, {"broken", 0.2}, {"stuck", 0.1}});
  OutcomeDistribution s = scale_difficulty(base, DifficultyLevel::custom(0.4));
  EXPECT_DOUBLE_EQ(s.probability("success"), 0.4);
  EXPECT_NEAR(s.probability("broken"), 0.4, 1e-15);
  EXPECT_NEAR(s.probability("stuck"), 0.2, 1e-15);
  EXPECT_NO_THROW(s.validate());
}

TEST(ScaleDifficultyTest, BaseAndDegenerateAreUnchanged) {
  OutcomeDistribution base = dist({{"success", 0.8}, {"broken", 0.2}});
  EXPECT_EQ(scale_difficulty(base, DifficultyLevel::base()), base);
  OutcomeDistribution certain = OutcomeDistribution::certain_success();
  EXPECT_EQ(scale_difficulty(certain, DifficultyLevel::hard()), certain);
}

TEST(ScaleDifficultyTest, EasyAlwaysSucceeds) {
  const ContingencyTable table = ContingencyTable::defaults();
  for (const auto& [key, d] : table.rows()) {
    OutcomeDistribution easy = scale_difficulty(d, DifficultyLevel::easy());
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      StreamRng rng(seed);
      EXPECT_EQ(sample_outcome(easy, rng), "success") << key;
    }
  }
}

TEST(ScaleDifficultyTest, SuccessMassIsMonotoneInRate) {
  OutcomeDistribution base = ContingencyTable::defaults().rows().at("IsOpen.Open");
  double previous = -1.0;
  for (double p = 0.0; p <= 1.0; p += 0.05) {
    OutcomeDistribution s = scale_difficulty(base, DifficultyLevel::custom(std::min(p, 1.0)));
    EXPECT_GE(s.probability("success"), previous);
    previous = s.probability("success");
    double total = 0.0;
    for (const auto& [n, q] : s.entries) total += q;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(DifficultyTest, Parse) {
  EXPECT_EQ(parse_difficulty("EASY")->success_rate, 1.0);
  EXPECT_EQ(parse_difficulty("medium")->success_rate, 0.5);
  EXPECT_EQ(parse_difficulty("Hard")->success_rate, 0.2);
  EXPECT_EQ(parse_difficulty("custom=0.35")->success_rate, 0.35);
  EXPECT_EQ(parse_difficulty("base")->name, DifficultyName::kBase);
  EXPECT_FALSE(parse_difficulty("custom=1.5"));
  EXPECT_FALSE(parse_difficulty("custom=abc"));
  EXPECT_FALSE(parse_difficulty("insane"));
  EXPECT_EQ(to_string(DifficultyLevel::custom(0.35)), "custom=0.35");
  EXPECT_THROW(DifficultyLevel::custom(-0.1), ConfigError);
}

TEST(DistributionTest, Validate) {
  EXPECT_NO_THROW(dist({{"success", 0.8}, {"broken", 0.2}}).validate());
  EXPECT_THROW(dist({{"success", 0.8}, {"broken", 0.17}}).validate(), ConfigError);
  EXPECT_THROW(dist({{"broken", 0.2}, {"success", 0.8}}).validate(), ConfigError);
  EXPECT_THROW(dist({{"success", 0.8}, {"exploded", 0.2}}).validate(), ConfigError);
  EXPECT_THROW(dist({{"success", 0.8}, {"broken", 0.1}, {"broken", 0.1}}).validate(),
               ConfigError);
  EXPECT_THROW(dist({{"success", 1.2}, {"broken", -0.2}}).validate(), ConfigError);
  EXPECT_THROW(OutcomeDistribution{}.validate(), ConfigError);
}

TEST(ContingencyTableTest, DefaultRowsAreValid) {
  auto rows = ContingencyTable::defaults().rows();
  EXPECT_EQ(rows.size(), 7u);
  for (const auto& [key, d] : rows) {
    EXPECT_NO_THROW(d.validate()) << key;
    EXPECT_DOUBLE_EQ(d.probability("success"), 0.8) << key;
  }
}

TEST(ContingencyTableTest, FromJsonNamesTheBadRow) {
  nlohmann::ordered_json doc = {{"IsSliced.Slice", {{"success", 0.8}, {"partial_slice", 0.17}}}};
  try {
    ContingencyTable::from_json(doc);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("IsSliced.Slice"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("0.97"), std::string::npos);
  }
  EXPECT_THROW(ContingencyTable::from_json({{"IsSliced", {{"success", 1.0}}}}), ConfigError);
  EXPECT_THROW(ContingencyTable::from_json({{"IsSliced.Rotate", {{"success", 1.0}}}}),
               ConfigError);
  EXPECT_THROW(ContingencyTable::from_json({{"Spoon/IsSliced.Slice", {{"success", 1.0}}}}),
               ConfigError);
  EXPECT_THROW(ContingencyTable::from_json({{"IsSliced.Slice", {{"broken", 1.0}}}}),
               ConfigError);
}

TEST(ContingencyTableTest, OverridesAndRoundTrip) {
  nlohmann::ordered_json doc = {
      {"Mug/IsFilled.Pick", {{"success", 0.6}, {"broken", 0.4}}},
      {"IsSliced.Slice", {{"success", 0.9}, {"partial_slice", 0.1}}}};
  ContingencyTable t = ContingencyTable::from_json(doc);
  EXPECT_EQ(t.rows().size(), 8u);
  EXPECT_DOUBLE_EQ(t.find(StateFlag::kIsSliced, ActionKind::kSlice)->probability("success"), 0.9);
  EXPECT_DOUBLE_EQ(
      t.find(StateFlag::kIsFilled, ActionKind::kPick, ObjectType::kMug)->probability("broken"),
      0.4);
  EXPECT_DOUBLE_EQ(
      t.find(StateFlag::kIsFilled, ActionKind::kPick, ObjectType::kCup)->probability("broken"),
      0.1);
  ContingencyTable again = ContingencyTable::from_json(t.to_json(), false);
  EXPECT_EQ(again.rows(), t.rows());
  ContingencyTable only = ContingencyTable::from_json(doc, false);
  EXPECT_EQ(only.rows().size(), 2u);
  EXPECT_EQ(only.find(StateFlag::kIsOpen, ActionKind::kOpen), nullptr);
}

ObjectInstance object_with(ObjectType type, std::map<StateFlag, bool> flags) {
  ObjectInstance o;
  o.id = "X";
  o.type = type;
  o.flags = std::move(flags);
  return o;
}

TEST(OutcomeTableTest, TargetFlagRowForPlainObjects) {
  ContingencyTable t = ContingencyTable::defaults();
  ObjectInstance apple = object_with(ObjectType::kApple,
                                     {{StateFlag::kIsPickedUp, false}, {StateFlag::kIsSliced, false}});
  EXPECT_EQ(outcome_table(apple, ActionKind::kPick, t), t.rows().at("IsPickedUp.Pick"));
  EXPECT_EQ(outcome_table(apple, ActionKind::kSlice, t), t.rows().at("IsSliced.Slice"));
}

TEST(OutcomeTableTest, ActiveStateRowTakesPrecedence) {
  ContingencyTable t = ContingencyTable::defaults();
  ObjectInstance cup = object_with(ObjectType::kCup,
                                   {{StateFlag::kIsPickedUp, false}, {StateFlag::kIsFilled, true}});
  EXPECT_EQ(outcome_table(cup, ActionKind::kPick, t), t.rows().at("IsFilled.Pick"));
  cup.flags[StateFlag::kIsFilled] = false;
  EXPECT_EQ(outcome_table(cup, ActionKind::kPick, t), t.rows().at("IsPickedUp.Pick"));
}

TEST(OutcomeTableTest, SeveralActiveRowsMixEvenly) {
  ContingencyTable t = ContingencyTable::defaults();
  t.set("IsSliced.Pick", dist({{"success", 0.6}, {"nothing_happens", 0.4}}));
  ObjectInstance bread = object_with(ObjectType::kMug, {{StateFlag::kIsPickedUp, false},
                                                        {StateFlag::kIsFilled, true},
                                                        {StateFlag::kIsSliced, true}});
  OutcomeDistribution m = outcome_table(bread, ActionKind::kPick, t);
  EXPECT_DOUBLE_EQ(m.probability("success"), 0.7);
  EXPECT_DOUBLE_EQ(m.probability("liquid_spill"), 0.05);
  EXPECT_DOUBLE_EQ(m.probability("broken"), 0.05);
  EXPECT_DOUBLE_EQ(m.probability("nothing_happens"), 0.2);
  EXPECT_EQ(m.entries.front().first, "success");
}

TEST(OutcomeTableTest, ActionsWithoutRowsAlwaysSucceed) {
  ContingencyTable t = ContingencyTable::defaults();
  ObjectInstance egg = object_with(ObjectType::kEgg, {{StateFlag::kIsCooked, false}});
  EXPECT_TRUE(outcome_table(egg, ActionKind::kCook, t).degenerate());
  EXPECT_TRUE(outcome_table(egg, ActionKind::kMoveAhead, t).degenerate());
}

}  // namespace
}  // namespace dualhab
