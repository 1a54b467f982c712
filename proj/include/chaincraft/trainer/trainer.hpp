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

#ifndef CHAINCRAFT_TRAINER_TRAINER_HPP_
#define CHAINCRAFT_TRAINER_TRAINER_HPP_

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "chaincraft/agent/network.hpp"
#include "chaincraft/env/chaincraft.hpp"
#include "chaincraft/nn/optimizer.hpp"
#include "chaincraft/replay/replay.hpp"
#include "chaincraft/rl/losses.hpp"

namespace chaincraft::trainer {

struct AblationFlags {
  bool er = false;   // experience replay
  bool sac = false;  // separate actor and critic networks
  bool ac = false;   // advantage clipping
  bool cl = false;   // CLEAR cloning losses

  std::string Label() const;
  bool operator==(const AblationFlags&) const = default;
};

struct TrainerConfig {
  AblationFlags flags;
  int replay_ratio = 15;
  std::int64_t frame_budget = 200000;
  double warmup_fraction = 0.0625;
  int actors = 5;
  int segment_length = 64;
  int batch_segments = 64;
  int replay_capacity = 4096;
  int queue_capacity = 64;
  double discount = 0.99;
  double reward_scale = 1.0;
  double rho_bar = 1.0;
  double c_bar = 1.0;
  rl::LossWeights loss_weights;
  agent::KlDirection kl_direction = agent::KlDirection::kReplayToCurrent;
  double learning_rate = 1e-4;
  double max_grad_norm = 40.0;
  std::uint64_t seed = 1;
  int curve_points = 20;

  // Throws ConfigurationError on invalid values. CL without ER is coerced
  // off with a warning.
  void Normalize();
  // Online segments per learner batch.
  int OnlinePerBatch() const;
  std::int64_t WarmupFrames() const;
  bool operator==(const TrainerConfig&) const = default;
};

// Blocking multi-producer queue. Push blocks while full; after Close(), Push
// returns false and Pop drains what is left.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

  bool Push(T item) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(item));
    not_empty_.notify_one();
    return true;
  }

  // Up to `n` items; blocks until `n` are available or the queue is closed.
  std::vector<T> PopUpTo(std::size_t n) {
    std::vector<T> out;
    std::unique_lock lock(mutex_);
    while (out.size() < n) {
      not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
      if (items_.empty()) break;
      out.push_back(std::move(items_.front()));
      items_.pop_front();
      not_full_.notify_one();
    }
    return out;
  }

  void Close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_full_.notify_all();
    not_empty_.notify_all();
  }

  bool closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
  }

 private:
  const std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<T> items_;
  bool closed_ = false;
};

struct PolicySnapshot {
  agent::AgentNetwork actor;  // kActor or kShared
  std::optional<agent::AgentNetwork> critic;
  std::uint64_t version = 0;
};

// Whole-snapshot swap under a lock.
class SnapshotSource {
 public:
  void Publish(std::shared_ptr<const PolicySnapshot> snapshot);
  std::shared_ptr<const PolicySnapshot> Get() const;
  std::uint64_t version() const;

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const PolicySnapshot> current_;
};

// Environment frames left in a run. Reservations never overshoot the budget.
class FrameBudget {
 public:
  explicit FrameBudget(std::int64_t total) : total_(total), used_(0) {}
  bool TryReserve(int frames);
  void Refund(int frames);
  std::int64_t used() const { return used_.load(); }
  std::int64_t total() const { return total_; }
  bool exhausted() const { return used_.load() >= total_; }

 private:
  const std::int64_t total_;
  std::atomic<std::int64_t> used_;
};

struct EpisodeRecord {
  std::int64_t end_frame = 0;  // budget frames used when the episode ended
  double episode_return = 0.0;
  std::uint32_t milestones = 0;
};

// Thread-safe collection of finished training episodes.
class EpisodeLedger {
 public:
  void Add(const EpisodeRecord& record);
  std::vector<EpisodeRecord> Snapshot() const;

 private:
  mutable std::mutex mutex_;
  std::vector<EpisodeRecord> records_;
};

struct ActorOptions {
  int actor_id = 0;
  std::uint64_t seed = 1;
  int segment_length = 64;
  // Stop after this many segments; < 0 runs until the budget is spent.
  int max_segments = -1;
};

// Rolls out the latest snapshot and pushes padded segments into `sink` until
// the budget is exhausted or the sink closes. Episodes never span segments'
// episode boundaries; recurrent states carry over within an episode.
void RunActor(const ActorOptions& options, const SnapshotSource& snapshots,
              const env::EnvConfig& env_config, FrameBudget& budget,
              BoundedQueue<replay::SegmentPtr>& sink, EpisodeLedger* episodes = nullptr);

struct UpdateMetrics {
  std::int64_t update = 0;
  std::int64_t frames = 0;  // online frames consumed by the learner
  bool warmup = false;
  std::size_t online = 0;
  std::size_t replayed = 0;
  double policy_gradient = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double policy_cloning = 0.0;
  double value_cloning = 0.0;
  double total = 0.0;
  double actor_grad_norm = 0.0;
  double critic_grad_norm = 0.0;
  double mean_rho = 0.0;
  // Rows from segments recorded by the learner's current version, and the
  // largest |log pi - log mu| among them.
  std::size_t on_policy_rows = 0;
  double on_policy_max_error = 0.0;
  std::size_t buffer_size = 0;
  std::uint64_t buffer_written = 0;
  double return_ema = 0.0;
};

// Owns the trainable networks and applies one composed update per batch.
class Learner {
 public:
  // `initial_policy` holds "actor/" parameters from pretraining; critic and
  // (in shared mode) value parameters are freshly initialised. Throws
  // ConfigurationError if the checkpoint does not fit.
  Learner(const TrainerConfig& config, const agent::NetworkConfig& network,
          const nn::ParameterSet* initial_policy);

  UpdateMetrics Update(const replay::MixedBatch& batch, bool warmup);
  std::shared_ptr<const PolicySnapshot> MakeSnapshot() const;

  agent::AgentNetwork& actor() { return actor_; }
  agent::AgentNetwork* critic() { return critic_ ? &*critic_ : nullptr; }
  // Actor and critic parameters under one set (names are disjoint).
  nn::ParameterSet AllParameters() const;
  std::uint64_t version() const { return version_; }

 private:
  TrainerConfig config_;
  agent::AgentNetwork actor_;
  std::optional<agent::AgentNetwork> critic_;
  std::unique_ptr<nn::Optimizer> actor_optimizer_;
  std::unique_ptr<nn::Optimizer> critic_optimizer_;
  std::uint64_t version_ = 0;
  std::int64_t updates_ = 0;
};

struct TrainResult {
  nn::ParameterSet params;
  std::vector<UpdateMetrics> metrics;
  std::vector<EpisodeRecord> episodes;
  std::int64_t frames_used = 0;
  std::int64_t warmup_updates = 0;
  std::uint64_t warmup_actor_hash_before = 0;
  std::uint64_t warmup_actor_hash_after = 0;
  // Online segments whose recording version equalled the learner's version.
  std::int64_t on_policy_segments = 0;
  double on_policy_max_rho_error = 0.0;
};

struct TrainOutputs {
  // Written when non-empty: metrics.csv, curve.csv, final.ckpt.
  std::filesystem::path directory;
  std::function<void(const UpdateMetrics&)> on_update;
};

TrainResult Train(const TrainerConfig& config, const agent::NetworkConfig& network,
                  const env::EnvConfig& env_config, const nn::ParameterSet* initial_policy,
                  const TrainOutputs& outputs = {});

// Mean training-episode return per frame bin: `points` bins over the budget.
// Empty bins carry NaN.
std::vector<std::pair<std::int64_t, double>> LearningCurve(
    const std::vector<EpisodeRecord>& episodes, std::int64_t budget, int points);

}  // namespace chaincraft::trainer

#endif  // CHAINCRAFT_TRAINER_TRAINER_HPP_
