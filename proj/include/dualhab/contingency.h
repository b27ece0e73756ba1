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

// Categorical outcome model for object-dependent actions.
//
// A table maps "<StateFlag>.<Action>" (optionally "<Type>/<StateFlag>.<Action>"
// for a per-type override) to an ordered outcome distribution. Sampling is an
// inverse-CDF draw over the fixed entry order using exactly one variate.

#ifndef DUALHAB_CONTINGENCY_H_
#define DUALHAB_CONTINGENCY_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dualhab/catalog.h"
#include "dualhab/rng.h"
#include "json.hpp"

namespace dualhab {

struct ObjectInstance;

namespace outcome {
inline constexpr std::string_view kSuccess = "success";
inline constexpr std::string_view kBroken = "broken";
inline constexpr std::string_view kNothingHappens = "nothing_happens";
inline constexpr std::string_view kLiquidSpill = "liquid_spill";
inline constexpr std::string_view kPartialSlice = "partial_slice";
inline constexpr std::string_view kLocked = "locked";
inline constexpr std::string_view kHalfOpen = "half_open";
inline constexpr std::string_view kStuck = "stuck";
}  // namespace outcome

// True for the eight outcome names the engine knows how to apply.
bool is_known_outcome(std::string_view name);

struct OutcomeDistribution {
  std::vector<std::pair<std::string, double>> entries;

  double probability(std::string_view name) const;
  // Only "success" with mass 1.
  bool degenerate() const;
  // Throws ConfigError describing the first problem.
  void validate() const;

  static OutcomeDistribution certain_success();

  friend bool operator==(const OutcomeDistribution&, const OutcomeDistribution&) = default;
};

enum class DifficultyName { kEasy, kMedium, kHard, kCustom, kBase };

struct DifficultyLevel {
  DifficultyName name = DifficultyName::kEasy;
  double success_rate = 1.0;  // ignored for kBase

  static DifficultyLevel easy() { return {DifficultyName::kEasy, 1.0}; }
  static DifficultyLevel medium() { return {DifficultyName::kMedium, 0.5}; }
  static DifficultyLevel hard() { return {DifficultyName::kHard, 0.2}; }
  // The table's own probabilities, unscaled.
  static DifficultyLevel base() { return {DifficultyName::kBase, 0.0}; }
  static DifficultyLevel custom(double p);
};

// "easy", "medium", "hard", "base", "custom=<p>" (case-insensitive).
std::optional<DifficultyLevel> parse_difficulty(std::string_view s);
std::string to_string(const DifficultyLevel& level);

class ContingencyTable {
 public:
  // The built-in rows (one per state/action pair the engine drives, plus the
  // pourable-container Pick row).
  static ContingencyTable defaults();
  // Rows in `doc` replace the defaults with the same key. Throws ConfigError
  // naming the offending row.
  static ContingencyTable from_json(const nlohmann::ordered_json& doc,
                                    bool start_from_defaults = true);

  // Row for (flag, action), preferring a per-type override. nullptr if none.
  const OutcomeDistribution* find(StateFlag flag, ActionKind action,
                                  std::optional<ObjectType> type = std::nullopt) const;
  void set(const std::string& key, OutcomeDistribution dist);
  const std::map<std::string, OutcomeDistribution>& rows() const { return rows_; }

  nlohmann::ordered_json to_json() const;

  static std::string key(StateFlag flag, ActionKind action,
                         std::optional<ObjectType> type = std::nullopt);

 private:
  std::map<std::string, OutcomeDistribution> rows_;
};

// Distribution for `action` on `object` in its current state. Rows keyed by
// flags the object currently has set (other than the action's own target
// flag) take precedence over the target-flag row; several such rows are mixed
// with equal weight. Falls back to certain success.
OutcomeDistribution outcome_table(const ObjectInstance& object, ActionKind action,
                                  const ContingencyTable& table);

// Success mass becomes the level's rate and the remainder is shared among the
// failure outcomes in proportion to their base weights. Distributions without
// failure mass are returned unchanged; Easy drops the failure entries.
OutcomeDistribution scale_difficulty(const OutcomeDistribution& dist,
                                     const DifficultyLevel& level);

// Consumes exactly one variate.
std::string sample_outcome(const OutcomeDistribution& dist, StreamRng& rng);
// Deterministic core of sample_outcome for a given variate u in [0, 1).
std::string outcome_at(const OutcomeDistribution& dist, double u);

}  // namespace dualhab

#endif  // DUALHAB_CONTINGENCY_H_
