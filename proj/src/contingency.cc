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

#include <algorithm>
#include <cmath>

#include "dualhab/error.h"
#include "dualhab/world.h"

namespace dualhab {
namespace {

constexpr double kNormTolerance = 1e-9;

OutcomeDistribution row(std::initializer_list<std::pair<const char*, double>> entries) {
  OutcomeDistribution d;
  for (const auto& [name, p] : entries) d.entries.emplace_back(name, p);
  return d;
}

// Default failure mass 0.2 split equally among a row's failure outcomes.
OutcomeDistribution even_row(std::initializer_list<const char*> failures) {
  OutcomeDistribution d;
  d.entries.emplace_back(outcome::kSuccess, 0.8);
  for (const char* f : failures) {
    d.entries.emplace_back(f, 0.2 / static_cast<double>(failures.size()));
  }
  return d;
}

}  // namespace

bool is_known_outcome(std::string_view name) {
  for (std::string_view known :
       {outcome::kSuccess, outcome::kBroken, outcome::kNothingHappens, outcome::kLiquidSpill,
        outcome::kPartialSlice, outcome::kLocked, outcome::kHalfOpen, outcome::kStuck}) {
    if (name == known) return true;
  }
  return false;
}

double OutcomeDistribution::probability(std::string_view name) const {
  for (const auto& [n, p] : entries) {
    if (n == name) return p;
  }
  return 0.0;
}

bool OutcomeDistribution::degenerate() const {
  for (const auto& [n, p] : entries) {
    if (n != outcome::kSuccess && p > 0.0) return false;
  }
  return true;
}

void OutcomeDistribution::validate() const {
  if (entries.empty()) throw ConfigError("distribution has no entries");
  if (entries.front().first != outcome::kSuccess) {
    throw ConfigError("'success' must be the first entry");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& [name, p] = entries[i];
    if (!is_known_outcome(name)) throw ConfigError("unknown outcome '" + name + "'");
    if (i > 0 && name == outcome::kSuccess) throw ConfigError("'success' appears twice");
    for (std::size_t j = 0; j < i; ++j) {
      if (entries[j].first == name) throw ConfigError("outcome '" + name + "' repeated");
    }
    if (!(p >= 0.0) || p > 1.0) {
      throw ConfigError("probability of '" + name + "' outside [0, 1]");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw ConfigError("probabilities sum to " + std::to_string(total) + ", expected 1");
  }
}

OutcomeDistribution OutcomeDistribution::certain_success() {
  return row({{"success", 1.0}});
}

DifficultyLevel DifficultyLevel::custom(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("custom success rate must lie in [0, 1]");
  return {DifficultyName::kCustom, p};
}

std::optional<DifficultyLevel> parse_difficulty(std::string_view s) {
  std::string lower = to_lower(s);
  if (lower == "easy") return DifficultyLevel::easy();
  if (lower == "medium") return DifficultyLevel::medium();
  if (lower == "hard") return DifficultyLevel::hard();
  if (lower == "base") return DifficultyLevel::base();
  constexpr std::string_view kPrefix = "custom=";
  if (lower.rfind(kPrefix, 0) == 0) {
    std::string number = lower.substr(kPrefix.size());
    try {
      std::size_t used = 0;
      double p = std::stod(number, &used);
      if (used != number.size() || !(p >= 0.0 && p <= 1.0)) return std::nullopt;
      return DifficultyLevel{DifficultyName::kCustom, p};
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::string to_string(const DifficultyLevel& level) {
  switch (level.name) {
    case DifficultyName::kEasy: return "easy";
    case DifficultyName::kMedium: return "medium";
    case DifficultyName::kHard: return "hard";
    case DifficultyName::kBase: return "base";
    case DifficultyName::kCustom: {
      nlohmann::json p = level.success_rate;
      return "custom=" + p.dump();
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------

std::string ContingencyTable::key(StateFlag flag, ActionKind action,
                                  std::optional<ObjectType> type) {
  std::string k = std::string(to_string(flag)) + "." + std::string(to_string(action));
  if (type) k = std::string(to_string(*type)) + "/" + k;
  return k;
}

ContingencyTable ContingencyTable::defaults() {
  using AK = ActionKind;
  using SF = StateFlag;
  ContingencyTable t;
  t.set(key(SF::kIsPickedUp, AK::kPick), even_row({"broken", "nothing_happens"}));
  t.set(key(SF::kIsFilled, AK::kFill), even_row({"liquid_spill", "nothing_happens"}));
  t.set(key(SF::kIsSliced, AK::kSlice), even_row({"partial_slice", "nothing_happens"}));
  t.set(key(SF::kIsLifted, AK::kLift), even_row({"broken", "nothing_happens"}));
  t.set(key(SF::kIsOpen, AK::kOpen), even_row({"locked", "half_open", "nothing_happens"}));
  t.set(key(SF::kIsToggledOn, AK::kToggle), even_row({"stuck", "nothing_happens"}));
  // Picking up a container that holds liquid.
  t.set(key(SF::kIsFilled, AK::kPick),
        row({{"success", 0.8}, {"liquid_spill", 0.1}, {"broken", 0.1}}));
  return t;
}

ContingencyTable ContingencyTable::from_json(const nlohmann::ordered_json& doc,
                                             bool start_from_defaults) {
  ContingencyTable t = start_from_defaults ? defaults() : ContingencyTable();
  if (!doc.is_object()) throw ConfigError("contingency config must be a JSON object");
  for (const auto& [k, value] : doc.items()) {
    // Key grammar: [<Type>/]<StateFlag>.<Action>
    std::string rest = k;
    std::optional<ObjectType> type;
    if (auto slash = rest.find('/'); slash != std::string::npos) {
      type = parse_object_type(rest.substr(0, slash));
      if (!type) throw ConfigError("row '" + k + "': unknown object type");
      rest = rest.substr(slash + 1);
    }
    auto dot = rest.rfind('.');
    if (dot == std::string::npos) throw ConfigError("row '" + k + "': expected <StateFlag>.<Action>");
    auto flag = parse_flag(rest.substr(0, dot));
    auto action = parse_action_kind(rest.substr(dot + 1));
    if (!flag) throw ConfigError("row '" + k + "': unknown state flag");
    if (!action || !is_object_dependent(*action)) {
      throw ConfigError("row '" + k + "': not an object-dependent action");
    }
    if (!value.is_object()) throw ConfigError("row '" + k + "': expected an object of probabilities");
    OutcomeDistribution d;
    if (value.contains("success") && value.at("success").is_number()) {
      d.entries.emplace_back("success", value.at("success").get<double>());
    }
    for (const auto& [name, p] : value.items()) {
      if (!p.is_number()) throw ConfigError("row '" + k + "': probability of '" + name + "' is not a number");
      if (name != "success") d.entries.emplace_back(name, p.get<double>());
    }
    if (d.entries.empty() || d.entries.front().first != "success") {
      throw ConfigError("row '" + k + "': missing 'success'");
    }
    try {
      d.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("row '" + k + "': " + e.what());
    }
    t.set(key(*flag, *action, type), std::move(d));
  }
  return t;
}

const OutcomeDistribution* ContingencyTable::find(StateFlag flag, ActionKind action,
                                                  std::optional<ObjectType> type) const {
  if (type) {
    auto it = rows_.find(key(flag, action, type));
    if (it != rows_.end()) return &it->second;
  }
  auto it = rows_.find(key(flag, action));
  return it == rows_.end() ? nullptr : &it->second;
}

void ContingencyTable::set(const std::string& k, OutcomeDistribution dist) {
  rows_[k] = std::move(dist);
}

nlohmann::ordered_json ContingencyTable::to_json() const {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [k, d] : rows_) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (const auto& [name, p] : d.entries) r[name] = p;
    doc[k] = std::move(r);
  }
  return doc;
}

// ---------------------------------------------------------------------------

OutcomeDistribution outcome_table(const ObjectInstance& object, ActionKind action,
                                  const ContingencyTable& table) {
  if (!is_object_dependent(action)) return OutcomeDistribution::certain_success();
  std::optional<StateFlag> target = target_flag(action);

  std::vector<const OutcomeDistribution*> state_rows;
  for (const auto& [flag, value] : object.flags) {
    if (!value || flag == target) continue;
    if (const auto* d = table.find(flag, action, object.type)) state_rows.push_back(d);
  }
  if (state_rows.empty()) {
    if (target) {
      if (const auto* d = table.find(*target, action, object.type)) return *d;
    }
    return OutcomeDistribution::certain_success();
  }
  if (state_rows.size() == 1) return *state_rows.front();

  // Equal-weight mixture over the union of outcomes.
  OutcomeDistribution mixed;
  mixed.entries.emplace_back("success", 0.0);
  const double w = 1.0 / static_cast<double>(state_rows.size());
  for (const auto* d : state_rows) {
    for (const auto& [name, p] : d->entries) {
      auto it = std::find_if(mixed.entries.begin(), mixed.entries.end(),
                             [&](const auto& e) { return e.first == name; });
      if (it == mixed.entries.end()) {
        mixed.entries.emplace_back(name, w * p);
      } else {
        it->second += w * p;
      }
    }
  }
  return mixed;
}

OutcomeDistribution scale_difficulty(const OutcomeDistribution& dist,
                                     const DifficultyLevel& level) {
  if (level.name == DifficultyName::kBase || dist.degenerate()) return dist;
  double failure_mass = 0.0;
  for (const auto& [name, p] : dist.entries) {
    if (name != outcome::kSuccess) failure_mass += p;
  }
  const double residual = 1.0 - level.success_rate;
  OutcomeDistribution scaled;
  scaled.entries.emplace_back("success", level.success_rate);
  if (residual <= 0.0) return scaled;
  for (const auto& [name, p] : dist.entries) {
    if (name == outcome::kSuccess) continue;
    scaled.entries.emplace_back(name, (p / failure_mass) * residual);
  }
  return scaled;
}

std::string outcome_at(const OutcomeDistribution& dist, double u) {
  double cumulative = 0.0;
  const std::string* last = nullptr;
  for (const auto& [name, p] : dist.entries) {
    if (p <= 0.0) continue;
    cumulative += p;
    last = &name;
    if (u < cumulative) return name;
  }
  // Rounding left u above the final cumulative sum.
  return last != nullptr ? *last : std::string(outcome::kSuccess);
}

std::string sample_outcome(const OutcomeDistribution& dist, StreamRng& rng) {
  return outcome_at(dist, rng.uniform());
}

}  // namespace dualhab
