// Copyright 2026 The psps-planner Authors
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

#ifndef PSPS_SEEDING_HPP_
#define PSPS_SEEDING_HPP_

#include <cstdint>

namespace psps {

// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed of an independent stream identified by (seed, stage, index), so that
// results do not depend on evaluation order or worker count.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stage,
                                    std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stage) ^ index);
}

// Stage tags for stream_seed.
inline constexpr std::uint64_t kStageOutages = 1;
inline constexpr std::uint64_t kStageClusters = 2;

}  // namespace psps

#endif  // PSPS_SEEDING_HPP_
