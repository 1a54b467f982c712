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

#ifndef CHAINCRAFT_DEMO_DEMOS_HPP_
#define CHAINCRAFT_DEMO_DEMOS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "chaincraft/env/chaincraft.hpp"

namespace chaincraft::demo {

struct DemoFrame {
  env::Observation observation;
  env::ComposedAction action;  // step multiplier always 1
  double reward = 0.0;
};

struct DemoEpisode {
  std::uint64_t seed = 0;
  // Degrees per turn frame the episode was recorded with.
  int turn_granularity_deg = 30;
  std::vector<DemoFrame> frames;
  double episode_return = 0.0;
  std::vector<env::MilestoneEvent> events;
};

struct DemoOptions {
  double noise_level = 0.0;
  // Record turns as 10-degree frames so the turn accumulation rule has
  // something to accumulate.
  bool fine_rotation = false;
  int max_attempts_per_episode = 10;
};

// Rolls out the scripted expert on `count` maps derived from base_seed.
// Episodes that never reach milestone 0 are regenerated on a fresh map.
std::vector<DemoEpisode> GenerateDemos(int count, std::uint64_t base_seed,
                                       const env::EnvConfig& env_config,
                                       const DemoOptions& options);

// Replays the recorded actions on a fresh map; true if rewards, final
// return and observations all match.
bool ReplayMatches(const DemoEpisode& episode, const env::EnvConfig& env_config);

// ---------------------------------------------------------------------------
// Subsampling

struct SubsampledRecord {
  env::Observation observation;
  env::ComposedAction action;
  bool operator==(const SubsampledRecord&) const = default;
};

struct SubsampledEpisode {
  std::uint64_t source_id = 0;
  std::uint32_t original_length = 0;
  std::vector<SubsampledRecord> records;

  std::size_t length() const { return records.size(); }
  bool operator==(const SubsampledEpisode&) const = default;
};

struct SubsampleConfig {
  std::size_t truncation = 2000;
  // Heads that are stripped from every action (no sneak/sprint analogue in
  // ChainCraft, so empty by default).
  std::vector<int> excluded_heads;
  int turn_threshold_deg = 30;
  // Turn accumulation runs before run-length collapsing. Not configurable.
  static constexpr bool kTurnAccumulationFirst = true;

  bool operator==(const SubsampleConfig&) const = default;
};

struct SubsampleStats {
  std::size_t original_frames = 0;
  std::size_t dropped_noop = 0;
  std::size_t dropped_excluded = 0;
  std::size_t dropped_turn = 0;
  std::size_t dropped_truncation = 0;
  std::size_t emitted_frames = 0;  // sum of emitted step multipliers
};

// Compresses a demonstration:
//  1. no-op frames are dropped;
//  2. excluded heads are stripped, frames left empty are dropped;
//  3. runs of identical actions become records whose step multiplier is the
//     run length quantised down to {1,2,4,8}, remainder re-emitted;
//  4. pure turn frames are accumulated into one turn once the threshold is
//     reached, flushed early on a direction change or a non-turn action
//     (rounded to the nearest of {0, +-threshold}).
// Output is truncated to the first `truncation` records.
SubsampledEpisode Subsample(const DemoEpisode& episode, const SubsampleConfig& config,
                            SubsampleStats* stats = nullptr);
// Same rules applied to an already compressed episode, treating each record
// as `multiplier` frames of its atomic action.
SubsampledEpisode Subsample(const SubsampledEpisode& episode,
                            const SubsampleConfig& config,
                            SubsampleStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Dataset file
//
//   "CCDS"  u32 version  u64 episode_count  u64 offsets[episode_count]
//   per episode: u64 source_id  u32 original_length  u32 record_count
//                records (observation, action)
inline constexpr char kDatasetMagic[4] = {'C', 'C', 'D', 'S'};
inline constexpr std::uint32_t kDatasetVersion = 1;

using Dataset = std::vector<SubsampledEpisode>;

void WriteDataset(std::ostream& out, const Dataset& dataset);
Dataset ReadDataset(std::istream& in);
void SaveDataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset LoadDataset(const std::filesystem::path& path);

void WriteObservation(std::ostream& out, const env::Observation& obs);
env::Observation ReadObservation(std::istream& in);
void WriteAction(std::ostream& out, const env::ComposedAction& action);
env::ComposedAction ReadAction(std::istream& in);

}  // namespace chaincraft::demo

#endif  // CHAINCRAFT_DEMO_DEMOS_HPP_
