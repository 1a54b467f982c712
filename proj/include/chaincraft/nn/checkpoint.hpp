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

#ifndef CHAINCRAFT_NN_CHECKPOINT_HPP_
#define CHAINCRAFT_NN_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "chaincraft/nn/parameter_set.hpp"

namespace chaincraft::nn {

// Layout (all integers little-endian):
//   "CCKP"  u32 version  u32 name_count
//   per parameter, in name order:
//     u32 name_length  name bytes  u32 rank  u64 dims[rank]  f64 values[...]
inline constexpr char kCheckpointMagic[4] = {'C', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void WriteCheckpoint(std::ostream& out, const ParameterSet& params);
ParameterSet ReadCheckpoint(std::istream& in);

void SaveCheckpoint(const std::filesystem::path& path, const ParameterSet& params);
ParameterSet LoadCheckpoint(const std::filesystem::path& path);

}  // namespace chaincraft::nn

#endif  // CHAINCRAFT_NN_CHECKPOINT_HPP_
