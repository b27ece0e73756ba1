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

#ifndef DUALHAB_RNG_H_
#define DUALHAB_RNG_H_

#include <cstdint>

namespace dualhab {

// SplitMix64 stream addressed by (seed, position). The whole generator state
// is two integers, so it serializes into a WorldState and restores exactly
// on undo.
class StreamRng {
 public:
  StreamRng() = default;
  explicit StreamRng(std::uint64_t seed, std::uint64_t position = 0)
      : seed_(seed), position_(position) {}

  std::uint64_t next_u64() {
    ++position_;
    return mix(seed_ + position_ * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(bound));
  }

  // Value of the next uniform() without advancing the stream.
  double peek_uniform() const {
    StreamRng copy = *this;
    return copy.uniform();
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return position_; }

  friend bool operator==(const StreamRng&, const StreamRng&) = default;

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_ = 0;
  std::uint64_t position_ = 0;
};

}  // namespace dualhab

#endif  // DUALHAB_RNG_H_
