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

#include "chaincraft/agent/features.hpp"

#include <algorithm>

#include "chaincraft/errors.hpp"

namespace chaincraft::agent {

double InventoryFeature(int count) { return std::min(count, 16) / 4.0; }

FeatureBatch Featurize(std::span<const env::Observation* const> observations) {
  if (observations.empty()) throw UsageError("Featurize: empty observation list");
  const std::size_t n = observations.size();
  const std::size_t cells = observations[0]->view.size();
  const auto side = static_cast<std::size_t>(observations[0]->view_side());
  if (side * side != cells) throw ConfigurationError("Featurize: view is not square");
  FeatureBatch batch;
  batch.spatial = nn::RealArray({n, std::size_t{env::kTileKinds}, side, side});
  batch.nonspatial = nn::RealArray({n, kNonSpatialSize});
  batch.inventory = nn::RealArray({n, kInventorySize});
  const std::size_t spatial_stride = env::kTileKinds * cells;
  for (std::size_t i = 0; i < n; ++i) {
    const env::Observation& obs = *observations[i];
    if (obs.view.size() != cells) throw ConfigurationError("Featurize: mixed view sizes");
    double* spatial = batch.spatial.data().data() + i * spatial_stride;
    for (std::size_t cell = 0; cell < cells; ++cell) {
      spatial[obs.view[cell] * cells + cell] = 1.0;
    }
    double* ns = batch.nonspatial.data().data() + i * kNonSpatialSize;
    double* inv = batch.inventory.data().data() + i * kInventorySize;
    std::size_t k = 0;
    for (std::size_t item = 0; item < env::kItemCount; ++item) {
      inv[item] = ns[k++] = InventoryFeature(obs.inventory[item]);
    }
    ns[k + std::min<std::size_t>(obs.equipped, 3)] = 1.0;
    k += 4;
    ns[k++] = obs.max_frames > 0
                  ? 1.0 - static_cast<double>(obs.frame) / static_cast<double>(obs.max_frames)
                  : 0.0;
    for (int h = 0; h < env::kHeadCount; ++h) {
      ns[k + static_cast<std::size_t>(obs.previous_action[h])] = 1.0;
      k += static_cast<std::size_t>(env::kHeadSizes[h]);
    }
  }
  return batch;
}

FeatureBatch Featurize(const env::Observation& observation) {
  const env::Observation* one[] = {&observation};
  return Featurize(one);
}

}  // namespace chaincraft::agent
