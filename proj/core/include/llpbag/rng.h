// Copyright 2026 The llpbag Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace llpbag {

using Rng = std::mt19937_64;

// Derives an independent generator from a root seed and a role tag
// ("data", "minibag", "perturb", ...). Streams for distinct tags never
// share state, so adding or reordering consumers of one stream leaves the
// others untouched.
Rng MakeStream(std::uint64_t root_seed, std::string_view tag,
               std::uint64_t index = 0);

// Mixes a seed and a tag into a 64-bit value (splitmix64 over FNV-1a).
std::uint64_t DeriveSeed(std::uint64_t root_seed, std::string_view tag,
                         std::uint64_t index = 0);

// Uniform double in [0, 1) with 53 random bits.
inline double UniformUnit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace llpbag
