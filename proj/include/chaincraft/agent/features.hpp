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

#ifndef CHAINCRAFT_AGENT_FEATURES_HPP_
#define CHAINCRAFT_AGENT_FEATURES_HPP_

#include <span>

#include "chaincraft/env/chaincraft.hpp"
#include "chaincraft/nn/real_array.hpp"

namespace chaincraft::agent {

// Non-spatial input: inventory (12) + equipped one-hot (4) + time remaining
// (1) + previous action one-hot per head (44).
inline constexpr std::size_t kNonSpatialSize = env::kItemCount + 4 + 1 + env::kActionLogits;
inline constexpr std::size_t kInventorySize = env::kItemCount;

struct FeatureBatch {
  nn::RealArray spatial;     // [N x tile_kinds x side x side], one-hot
  nn::RealArray nonspatial;  // [N x kNonSpatialSize]
  nn::RealArray inventory;   // [N x kInventorySize]

  std::size_t rows() const { return nonspatial.rows(); }
};

double InventoryFeature(int count);

// Rows follow the order of `observations`. All views must share one size.
FeatureBatch Featurize(std::span<const env::Observation* const> observations);
FeatureBatch Featurize(const env::Observation& observation);

}  // namespace chaincraft::agent

#endif  // CHAINCRAFT_AGENT_FEATURES_HPP_
