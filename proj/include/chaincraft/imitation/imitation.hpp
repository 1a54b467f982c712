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

#ifndef CHAINCRAFT_IMITATION_IMITATION_HPP_
#define CHAINCRAFT_IMITATION_IMITATION_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "chaincraft/agent/network.hpp"
#include "chaincraft/demo/demos.hpp"
#include "chaincraft/nn/optimizer.hpp"

namespace chaincraft::imitation {

struct PretrainConfig {
  int epochs = 125;
  double learning_rate = 0.001;
  int batch_size = 16;
  int bptt_window = 64;
  double holdout_fraction = 0.1;
  double max_grad_norm = 40.0;
  std::array<double, env::kHeadCount> head_weights = {1, 1, 1, 1, 1, 1, 1};
  std::uint64_t seed = 1;

  void Validate() const;
  bool operator==(const PretrainConfig&) const = default;
};

// A window [begin, begin + length) of one episode.
struct EpisodeSlice {
  const demo::SubsampledEpisode* episode = nullptr;
  std::size_t begin = 0;
  std::size_t length = 0;
};

// Per-step loss: sum over heads of weight_h * -log pi(a_h | s), averaged over
// the non-padding steps of the batch. Slices are stepped in lockstep with
// `states` (one per slice, updated in place to the state after each slice).
// Applies one optimizer step and returns the loss before it. Throws
// UsageError on an empty batch.
double SupervisedUpdate(agent::AgentNetwork& actor, nn::Optimizer& optimizer,
                        std::span<const EpisodeSlice> slices,
                        std::vector<agent::RecurrentState>& states,
                        const std::array<double, env::kHeadCount>& head_weights,
                        double max_grad_norm = 0.0);

// Same loss without an update.
double SupervisedLoss(agent::AgentNetwork& actor, std::span<const EpisodeSlice> slices,
                      std::vector<agent::RecurrentState>& states,
                      const std::array<double, env::kHeadCount>& head_weights);

struct HoldoutAccuracy {
  std::array<double, env::kHeadCount> per_head{};
  double joint = 0.0;  // all heads correct
  std::size_t steps = 0;
};

// Greedy action prediction over whole episodes with carried state.
HoldoutAccuracy EvaluateAccuracy(agent::AgentNetwork& actor,
                                 std::span<const demo::SubsampledEpisode* const> episodes);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  int updates = 0;
  HoldoutAccuracy holdout;
};

struct PretrainResult {
  nn::ParameterSet params;
  std::vector<EpochStats> epochs;
  double initial_loss = 0.0;
  std::size_t train_episodes = 0;
  std::size_t holdout_episodes = 0;
};

struct PretrainOutputs {
  // Written when non-empty: latest.ckpt (every epoch), final.ckpt,
  // epochs.csv and pretrain.json.
  std::filesystem::path directory;
  std::function<void(const EpochStats&)> on_epoch;
};

// Throws UsageError on an empty dataset and ConfigurationError when an action
// or observation does not fit the network.
PretrainResult Pretrain(const demo::Dataset& dataset, const agent::NetworkConfig& network,
                        const PretrainConfig& config, const PretrainOutputs& outputs = {});

// Checks every record of `dataset` against the network's heads and view.
void CheckDatasetCompatible(const demo::Dataset& dataset, const agent::NetworkConfig& network);

}  // namespace chaincraft::imitation

#endif  // CHAINCRAFT_IMITATION_IMITATION_HPP_
