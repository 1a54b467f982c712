// Copyright 2026 The ChainCraft Authors
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

#ifndef CHAINCRAFT_SEEDING_HPP_
#define CHAINCRAFT_SEEDING_HPP_

#include <cstdint>
#include <initializer_list>

namespace chaincraft {

inline std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent stream seed for a tuple of indices under `base`.
inline std::uint64_t DeriveSeed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = SplitMix(base);
  for (std::uint64_t p : parts) h = SplitMix(h ^ SplitMix(p + 0x632BE59BD9B4E019ULL));
  return h;
}

}  // namespace chaincraft

#endif  // CHAINCRAFT_SEEDING_HPP_
