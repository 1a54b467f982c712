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

#ifndef CHAINCRAFT_REPLAY_REPLAY_HPP_
#define CHAINCRAFT_REPLAY_REPLAY_HPP_

#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <vector>

#include "chaincraft/agent/network.hpp"
#include "chaincraft/env/chaincraft.hpp"
#include "chaincraft/rl/losses.hpp"

namespace chaincraft::replay {

struct SegmentStep {
  env::Observation observation;
  env::ComposedAction action;
  double reward = 0.0;
  bool done = false;
  std::vector<double> behavior_log_probs;  // 44 per-head log-probabilities
  double behavior_value = 0.0;
  int frames = 0;  // environment frames consumed, multiplier included
};

// Fixed-length slice of one episode. Steps at index >= valid_length are
// padding: no-op action, zero reward, done set, uniform log-probabilities,
// and the observation that follows the last valid step.
struct TrajectorySegment {
  std::vector<SegmentStep> steps;
  std::size_t valid_length = 0;
  env::Observation bootstrap_observation;
  agent::RecurrentState actor_state;
  agent::RecurrentState critic_state;  // empty in shared-trunk mode
  std::uint64_t episode_id = 0;
  int actor_id = 0;
  std::uint64_t policy_version = 0;

  std::size_t length() const { return steps.size(); }
  bool ended() const { return valid_length > 0 && steps[valid_length - 1].done; }
  // Observation t for t in [0, L]; index L is the bootstrap observation.
  const env::Observation& ObservationAt(std::size_t t) const;
  int Frames() const;
  std::size_t ApproxBytes() const;
};

// Appends padding until `segment` has `length` steps.
void PadSegment(TrajectorySegment& segment, std::size_t length);

// Throws UsageError naming the first violated invariant.
void ValidateSegment(const TrajectorySegment& segment, std::size_t length);

using SegmentPtr = std::shared_ptr<const TrajectorySegment>;

// Fixed-capacity FIFO ring. Safe for concurrent Push and Sample.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t segment_length);

  void Push(SegmentPtr segment);
  void Push(TrajectorySegment segment) {
    Push(std::make_shared<const TrajectorySegment>(std::move(segment)));
  }
  // n uniform draws with replacement. Throws UnavailableError when empty and
  // n > 0.
  std::vector<SegmentPtr> Sample(std::size_t n, std::mt19937_64& rng) const;

  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }
  std::size_t segment_length() const { return segment_length_; }
  std::uint64_t total_written() const;
  std::size_t StoredBytes() const;
  // Oldest first.
  std::vector<SegmentPtr> Contents() const;

 private:
  const std::size_t capacity_;
  const std::size_t segment_length_;
  mutable std::mutex mutex_;
  std::vector<SegmentPtr> ring_;
  std::size_t cursor_ = 0;
  std::uint64_t total_written_ = 0;
  std::size_t stored_bytes_ = 0;
};

struct MixedBatch {
  std::vector<SegmentPtr> segments;
  std::vector<rl::SampleSource> sources;

  std::size_t size() const { return segments.size(); }
  std::size_t CountOf(rl::SampleSource source) const;
};

// Online segments first, then ratio * |online| replay draws. With an empty
// buffer, `buffer` == nullptr, or ratio 0, the batch is online only.
MixedBatch ComposeBatch(const std::vector<SegmentPtr>& online, int ratio,
                        const ReplayBuffer* buffer, std::mt19937_64& rng);

}  // namespace chaincraft::replay

#endif  // CHAINCRAFT_REPLAY_REPLAY_HPP_
