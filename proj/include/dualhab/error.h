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

#ifndef DUALHAB_ERROR_H_
#define DUALHAB_ERROR_H_

#include <stdexcept>
#include <string>

namespace dualhab {

// Base of every error the engine raises. `kind()` is a stable identifier
// ("SchemaError", "Unreachable", ...) suitable for wire messages.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define DUALHAB_DEFINE_ERROR(Name)                                     \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

DUALHAB_DEFINE_ERROR(SchemaError);
DUALHAB_DEFINE_ERROR(PlacementError);
DUALHAB_DEFINE_ERROR(UnknownEntity);
DUALHAB_DEFINE_ERROR(LimitViolation);
DUALHAB_DEFINE_ERROR(Unreachable);
DUALHAB_DEFINE_ERROR(BalanceViolation);
DUALHAB_DEFINE_ERROR(DimensionMismatch);
DUALHAB_DEFINE_ERROR(ParseError);
DUALHAB_DEFINE_ERROR(UnknownOutcome);
DUALHAB_DEFINE_ERROR(NoFreeAdjacentCell);
DUALHAB_DEFINE_ERROR(NothingToUndo);
DUALHAB_DEFINE_ERROR(NothingToRedo);
DUALHAB_DEFINE_ERROR(NoValidBinding);
DUALHAB_DEFINE_ERROR(ConfigError);

#undef DUALHAB_DEFINE_ERROR

}  // namespace dualhab

#endif  // DUALHAB_ERROR_H_
