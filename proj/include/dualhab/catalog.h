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

// Shared vocabulary: object types with their actionable properties and
// licensed state flags, action kinds, and the small enums used across the
// engine. Every enum has a stable lower/upper-case name for serialization.

#ifndef DUALHAB_CATALOG_H_
#define DUALHAB_CATALOG_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace dualhab {

enum class RoomKind { kKitchen, kBedroom, kLivingRoom, kBathroom, kMixed };

enum class HeightBand { kLow, kCounter, kHigh };

// Grid headings. North is +y, east is +x.
enum class Heading { kN, kE, kS, kW };

enum class Posture { kStand, kCrouch };

enum class ArmSide { kLeft, kRight };

enum class RobotProfile { kX1, kH1 };

enum class StateFlag {
  kIsPickedUp,
  kIsSliced,
  kIsCooked,
  kIsOpen,
  kIsFilled,
  kIsToggledOn,
  kIsLifted,
  kIsUsedUp,
};
inline constexpr int kNumStateFlags = 8;

enum class Actionable : std::uint8_t {
  kPickupable = 1 << 0,
  kSliceable = 1 << 1,
  kOpenable = 1 << 2,
  kToggleable = 1 << 3,
  kMovable = 1 << 4,
  kFillable = 1 << 5,
};

enum class ActionKind {
  kMoveAhead,
  kMoveBack,
  kMoveLeft,
  kMoveRight,
  kRotateLeft,
  kRotateRight,
  kPick,
  kLift,
  kPlace,
  kToggle,
  kOpen,
  kFill,
  kSlice,
  kCook,
  kUse,
  kTeleport,
  kUndo,
  kRedo,
  kLoadState,
  kSolveIK,
  kCrouch,
  kStand,
  kObserve,
};

enum class ObjectType {
  kAlarmClock,
  kApple,
  kBaseballBat,
  kBook,
  kBottle,
  kBowl,
  kBread,
  kCabinet,
  kCandle,
  kCoat,
  kCoffeeMachine,
  kCup,
  kCurtains,
  kDeskLamp,
  kDrawer,
  kEgg,
  kFaucet,
  kFork,
  kFridge,
  kKnife,
  kLaptop,
  kLettuce,
  kLightSwitch,
  kMicrowave,
  kMug,
  kOnion,
  kOrange,
  kPan,
  kPant,
  kPen,
  kPencil,
  kPepperShaker,
  kPicture,
  kPillow,
  kPizza,
  kPlant,
  kPlate,
  kPlunger,
  kPot,
  kRemoteControl,
  kSaltShaker,
  kSoapBar,
  kSoapBottle,
  kShirt,
  kStoveKnob,
  kTelevision,
  kToaster,
  kToiletPaper,
  kTomato,
  kTowel,
  kWatch,
  kWineBottle,
  kWindow,
};
inline constexpr int kNumObjectTypes = 53;

// One row of the object catalog.
struct TypeInfo {
  ObjectType type;
  std::string_view name;
  std::uint8_t actionable;  // Actionable bits
  std::uint8_t flags;       // bit i set => StateFlag(i) licensed
  std::uint8_t rooms;       // bit per RoomKind (Mixed admits every type)
  // Engine-level roles that the catalog itself does not name.
  bool receptacle;    // accepts Place
  bool liquid_source; // can fill containers when toggled on
};

const TypeInfo& type_info(ObjectType type);
std::span<const TypeInfo> all_types();

bool has_actionable(ObjectType type, Actionable a);
bool flag_licensed(ObjectType type, StateFlag flag);
// Pickupable object that licenses IsFilled.
bool is_fillable_container(ObjectType type);

// Actions whose outcome depends on an object (and hence on contingencies).
bool is_object_dependent(ActionKind kind);
// Actions that move the robot or change its posture; they release any
// fixture an arm is holding (a sprung container or a momentary faucet).
bool is_robot_motion(ActionKind kind);
// The state flag an object-dependent action drives, if any.
std::optional<StateFlag> target_flag(ActionKind kind);

std::string_view to_string(RoomKind v);
std::string_view to_string(HeightBand v);
std::string_view to_string(Heading v);
std::string_view to_string(Posture v);
std::string_view to_string(ArmSide v);
std::string_view to_string(RobotProfile v);
std::string_view to_string(StateFlag v);
std::string_view to_string(ActionKind v);
std::string_view to_string(ObjectType v);
std::string_view to_string(Actionable v);

// Parsers are case-insensitive and return nullopt for unknown names.
std::optional<RoomKind> parse_room_kind(std::string_view s);
std::optional<HeightBand> parse_band(std::string_view s);
std::optional<Heading> parse_heading(std::string_view s);
std::optional<Posture> parse_posture(std::string_view s);
std::optional<ArmSide> parse_arm(std::string_view s);
std::optional<RobotProfile> parse_profile(std::string_view s);
std::optional<StateFlag> parse_flag(std::string_view s);
std::optional<ActionKind> parse_action_kind(std::string_view s);
std::optional<ObjectType> parse_object_type(std::string_view s);

std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

inline ArmSide other(ArmSide side) {
  return side == ArmSide::kLeft ? ArmSide::kRight : ArmSide::kLeft;
}

}  // namespace dualhab

#endif  // DUALHAB_CATALOG_H_
