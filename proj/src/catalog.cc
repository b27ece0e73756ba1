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

#include "dualhab/catalog.h"

#include <algorithm>
#include <array>
#include <cctype>

namespace dualhab {
namespace {

constexpr std::uint8_t Pk = static_cast<std::uint8_t>(Actionable::kPickupable);
constexpr std::uint8_t Sl = static_cast<std::uint8_t>(Actionable::kSliceable);
constexpr std::uint8_t Op = static_cast<std::uint8_t>(Actionable::kOpenable);
constexpr std::uint8_t Tg = static_cast<std::uint8_t>(Actionable::kToggleable);
constexpr std::uint8_t Mv = static_cast<std::uint8_t>(Actionable::kMovable);
constexpr std::uint8_t Fl = static_cast<std::uint8_t>(Actionable::kFillable);

constexpr std::uint8_t P = 1 << 0;  // IsPickedUp
constexpr std::uint8_t S = 1 << 1;  // IsSliced
constexpr std::uint8_t C = 1 << 2;  // IsCooked
constexpr std::uint8_t O = 1 << 3;  // IsOpen
constexpr std::uint8_t F = 1 << 4;  // IsFilled
constexpr std::uint8_t T = 1 << 5;  // IsToggledOn
constexpr std::uint8_t L = 1 << 6;  // IsLifted
constexpr std::uint8_t U = 1 << 7;  // IsUsedUp

constexpr std::uint8_t Kit = 1 << 0;
constexpr std::uint8_t Bed = 1 << 1;
constexpr std::uint8_t Liv = 1 << 2;
constexpr std::uint8_t Bat = 1 << 3;
constexpr std::uint8_t All = Kit | Bed | Liv | Bat;

using OT = ObjectType;

// clang-format off
constexpr std::array<TypeInfo, kNumObjectTypes> kTypes = {{
    {OT::kAlarmClock,    "AlarmClock",    Pk,      P,         Bed,       false, false},
    {OT::kApple,         "Apple",         Pk | Sl, P | S,     Kit,       false, false},
    {OT::kBaseballBat,   "BaseballBat",   Pk,      P,         Bed,       false, false},
    {OT::kBook,          "Book",          Pk | Op, P | O,     Liv,       false, false},
    {OT::kBottle,        "Bottle",        Pk,      P | F,     Kit,       false, false},
    {OT::kBowl,          "Bowl",          Pk,      P | F,     Kit,       true,  false},
    {OT::kBread,         "Bread",         Pk | Sl, P | S | C, Kit,       false, false},
    {OT::kCabinet,       "Cabinet",       Op,      O,         Kit | Bed, true,  false},
    {OT::kCandle,        "Candle",        Pk | Tg, P | T,     Liv,       false, false},
    {OT::kCoat,          "Coat",          Pk,      P,         Liv,       false, false},
    {OT::kCoffeeMachine, "CoffeeMachine", Tg | Mv, T | L,     Kit,       true,  true},
    {OT::kCup,           "Cup",           Pk,      P | F,     Kit,       false, false},
    {OT::kCurtains,      "Curtains",      Op,      O,         Kit,       false, false},
    {OT::kDeskLamp,      "DeskLamp",      Tg,      T,         Bed | Liv, false, false},
    {OT::kDrawer,        "Drawer",        Op,      O,         Kit,       true,  false},
    {OT::kEgg,           "Egg",           Pk,      P | C,     Kit,       false, false},
    {OT::kFaucet,        "Faucet",        Tg,      T,         Kit | Bat, true,  true},
    {OT::kFork,          "Fork",          Pk,      P,         Kit,       false, false},
    {OT::kFridge,        "Fridge",        Op,      O,         Kit,       true,  false},
    {OT::kKnife,         "Knife",         Pk,      P,         Kit,       false, false},
    {OT::kLaptop,        "Laptop",        Pk | Tg, P | T,     Liv,       false, false},
    {OT::kLettuce,       "Lettuce",       Pk | Sl, P | S,     Kit,       false, false},
    {OT::kLightSwitch,   "LightSwitch",   Tg,      T,         Bed | Liv, false, false},
    {OT::kMicrowave,     "Microwave",     Op | Tg, O | T,     Kit,       true,  false},
    {OT::kMug,           "Mug",           Pk | Fl, P | F,     Kit,       false, false},
    {OT::kOnion,         "Onion",         Pk | Sl, P | S,     Kit,       false, false},
    {OT::kOrange,        "Orange",        Pk | Sl, P | S,     Kit,       false, false},
    {OT::kPan,           "Pan",           Pk,      P,         Kit,       true,  false},
    {OT::kPant,          "Pant",          Pk,      P,         Liv,       false, false},
    {OT::kPen,           "Pen",           Pk,      P,         Liv | Bed, false, false},
    {OT::kPencil,        "Pencil",        Pk,      P,         Liv | Bed, false, false},
    {OT::kPepperShaker,  "PepperShaker",  Pk,      P,         Kit,       false, false},
    {OT::kPicture,       "Picture",       Pk,      P,         Liv | Bed, false, false},
    {OT::kPillow,        "Pillow",        Pk,      P,         Bed | Liv, false, false},
    {OT::kPizza,         "Pizza",         Pk | Sl, P | S,     Kit,       false, false},
    {OT::kPlant,         "Plant",         Pk,      P,         All,       false, false},
    {OT::kPlate,         "Plate",         Pk,      P,         Kit,       true,  false},
    {OT::kPlunger,       "Plunger",       Pk,      P,         Bat,       false, false},
    {OT::kPot,           "Pot",           Pk,      P | F,     Kit,       true,  false},
    {OT::kRemoteControl, "RemoteControl", Pk,      P,         Liv,       false, false},
    {OT::kSaltShaker,    "SaltShaker",    Pk,      P,         Kit,       false, false},
    {OT::kSoapBar,       "SoapBar",       Pk,      P,         Bat,       false, false},
    {OT::kSoapBottle,    "SoapBottle",    Pk,      P | F,     Bat | Kit, false, false},
    {OT::kShirt,         "Shirt",         Pk,      P,         Liv,       false, false},
    {OT::kStoveKnob,     "StoveKnob",     Tg,      T,         Kit,       false, false},
    {OT::kTelevision,    "Television",    Tg | Mv, T | L,     Liv,       false, false},
    {OT::kToaster,       "Toaster",       Tg | Mv, T | L,     Kit,       false, false},
    {OT::kToiletPaper,   "ToiletPaper",   Pk,      P | U,     Bat,       false, false},
    {OT::kTomato,        "Tomato",        Pk | Sl, P | S | C, Kit,       false, false},
    {OT::kTowel,         "Towel",         Pk,      P,         Bat,       false, false},
    {OT::kWatch,         "Watch",         Pk,      P,         Bed,       false, false},
    {OT::kWineBottle,    "WineBottle",    Pk,      P | F,     Kit,       false, false},
    {OT::kWindow,        "Window",        Op,      O,         All,       false, false},
}};
// clang-format on

constexpr std::array<std::string_view, 5> kRoomNames = {
    "Kitchen", "Bedroom", "LivingRoom", "Bathroom", "Mixed"};
constexpr std::array<std::string_view, 3> kBandNames = {"low", "counter", "high"};
constexpr std::array<std::string_view, 4> kHeadingNames = {"N", "E", "S", "W"};
constexpr std::array<std::string_view, 2> kPostureNames = {"Stand", "Crouch"};
constexpr std::array<std::string_view, 2> kArmNames = {"left", "right"};
constexpr std::array<std::string_view, 2> kProfileNames = {"x1", "h1"};
constexpr std::array<std::string_view, kNumStateFlags> kFlagNames = {
    "IsPickedUp", "IsSliced",    "IsCooked", "IsOpen",
    "IsFilled",   "IsToggledOn", "IsLifted", "IsUsedUp"};
constexpr std::array<std::string_view, 23> kActionNames = {
    "MoveAhead", "MoveBack", "MoveLeft", "MoveRight", "RotateLeft",
    "RotateRight", "Pick", "Lift", "Place", "Toggle", "Open", "Fill",
    "Slice", "Cook", "Use", "Teleport", "Undo", "Redo", "LoadState",
    "SolveIK", "Crouch", "Stand", "Observe"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names,
                           std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (iequals(names[i], s)) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

}  // namespace

const TypeInfo& type_info(ObjectType type) {
  return kTypes[static_cast<std::size_t>(type)];
}

std::span<const TypeInfo> all_types() { return kTypes; }

bool has_actionable(ObjectType type, Actionable a) {
  return (type_info(type).actionable & static_cast<std::uint8_t>(a)) != 0;
}

bool flag_licensed(ObjectType type, StateFlag flag) {
  return (type_info(type).flags & (1u << static_cast<unsigned>(flag))) != 0;
}

bool is_fillable_container(ObjectType type) {
  return has_actionable(type, Actionable::kPickupable) &&
         flag_licensed(type, StateFlag::kIsFilled);
}

bool is_object_dependent(ActionKind kind) {
  switch (kind) {
    case ActionKind::kPick:
    case ActionKind::kLift:
    case ActionKind::kPlace:
    case ActionKind::kToggle:
    case ActionKind::kOpen:
    case ActionKind::kFill:
    case ActionKind::kSlice:
    case ActionKind::kCook:
    case ActionKind::kUse:
      return true;
    default:
      return false;
  }
}

bool is_robot_motion(ActionKind kind) {
  switch (kind) {
    case ActionKind::kMoveAhead:
    case ActionKind::kMoveBack:
    case ActionKind::kMoveLeft:
    case ActionKind::kMoveRight:
    case ActionKind::kRotateLeft:
    case ActionKind::kRotateRight:
    case ActionKind::kTeleport:
    case ActionKind::kCrouch:
    case ActionKind::kStand:
      return true;
    default:
      return false;
  }
}

std::optional<StateFlag> target_flag(ActionKind kind) {
  switch (kind) {
    case ActionKind::kPick: return StateFlag::kIsPickedUp;
    case ActionKind::kLift: return StateFlag::kIsLifted;
    case ActionKind::kToggle: return StateFlag::kIsToggledOn;
    case ActionKind::kOpen: return StateFlag::kIsOpen;
    case ActionKind::kFill: return StateFlag::kIsFilled;
    case ActionKind::kSlice: return StateFlag::kIsSliced;
    case ActionKind::kCook: return StateFlag::kIsCooked;
    case ActionKind::kUse: return StateFlag::kIsUsedUp;
    default: return std::nullopt;
  }
}

std::string_view to_string(RoomKind v) { return kRoomNames[static_cast<int>(v)]; }
std::string_view to_string(HeightBand v) { return kBandNames[static_cast<int>(v)]; }
std::string_view to_string(Heading v) { return kHeadingNames[static_cast<int>(v)]; }
std::string_view to_string(Posture v) { return kPostureNames[static_cast<int>(v)]; }
std::string_view to_string(ArmSide v) { return kArmNames[static_cast<int>(v)]; }
std::string_view to_string(RobotProfile v) { return kProfileNames[static_cast<int>(v)]; }
std::string_view to_string(StateFlag v) { return kFlagNames[static_cast<int>(v)]; }
std::string_view to_string(ActionKind v) { return kActionNames[static_cast<int>(v)]; }
std::string_view to_string(ObjectType v) { return type_info(v).name; }

std::string_view to_string(Actionable v) {
  switch (v) {
    case Actionable::kPickupable: return "Pickupable";
    case Actionable::kSliceable: return "Sliceable";
    case Actionable::kOpenable: return "Openable";
    case Actionable::kToggleable: return "Toggleable";
    case Actionable::kMovable: return "Movable";
    case Actionable::kFillable: return "Fillable";
  }
  return "?";
}

std::optional<RoomKind> parse_room_kind(std::string_view s) {
  return lookup<RoomKind>(kRoomNames, s);
}
std::optional<HeightBand> parse_band(std::string_view s) {
  return lookup<HeightBand>(kBandNames, s);
}
std::optional<Heading> parse_heading(std::string_view s) {
  return lookup<Heading>(kHeadingNames, s);
}
std::optional<Posture> parse_posture(std::string_view s) {
  return lookup<Posture>(kPostureNames, s);
}
std::optional<ArmSide> parse_arm(std::string_view s) {
  return lookup<ArmSide>(kArmNames, s);
}
std::optional<RobotProfile> parse_profile(std::string_view s) {
  return lookup<RobotProfile>(kProfileNames, s);
}
std::optional<StateFlag> parse_flag(std::string_view s) {
  // Accept the catalog's "IsToggledOn/Off" spelling too.
  if (iequals(s, "IsToggledOn/Off")) return StateFlag::kIsToggledOn;
  return lookup<StateFlag>(kFlagNames, s);
}

std::optional<ActionKind> parse_action_kind(std::string_view s) {
  if (iequals(s, "tp")) return ActionKind::kTeleport;
  if (iequals(s, "pickup")) return ActionKind::kPick;
  return lookup<ActionKind>(kActionNames, s);
}

std::optional<ObjectType> parse_object_type(std::string_view s) {
  for (const auto& info : kTypes) {
    if (iequals(info.name, s)) return info.type;
  }
  return std::nullopt;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace dualhab
