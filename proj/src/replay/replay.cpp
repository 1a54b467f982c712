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

#include "chaincraft/replay/replay.hpp"

#include <cmath>
#include <string>

#include "chaincraft/errors.hpp"
#include "chaincraft/log.hpp"

namespace chaincraft::replay {
namespace {

std::vector<double> UniformLogProbs() { return agent::ComposedDistribution::Uniform().Flat(); }

std::size_t ObservationBytes(const env::Observation& obs) {
  return sizeof(env::Observation) + obs.view.capacity();
}

}  // namespace

const env::Observation& TrajectorySegment::ObservationAt(std::size_t t) const {
  if (t < steps.size()) return steps[t].observation;
  if (t == steps.size()) return bootstrap_observation;
  throw UsageError("TrajectorySegment: observation index out of range");
}

int TrajectorySegment::Frames() const {
  int frames = 0;
  for (const auto& s : steps) frames += s.frames;
  return frames;
}

std::size_t TrajectorySegment::ApproxBytes() const {
  std::size_t bytes = sizeof(TrajectorySegment) + ObservationBytes(bootstrap_observation);
  for (const auto& s : steps) {
    bytes += sizeof(SegmentStep) + ObservationBytes(s.observation) - sizeof(env::Observation) +
             s.behavior_log_probs.capacity() * sizeof(double);
  }
  bytes += (actor_state.h.size() + actor_state.c.size() + critic_state.h.size() +
            critic_state.c.size()) *
           sizeof(double);
  return bytes;
}

void PadSegment(TrajectorySegment& segment, std::size_t length) {
  if (segment.steps.size() > length) throw UsageError("PadSegment: segment already longer");
  segment.valid_length = segment.steps.size();
  while (segment.steps.size() < length) {
    SegmentStep pad;
    pad.observation = segment.bootstrap_observation;
    pad.action = env::NoOp();
    pad.done = true;
    pad.behavior_log_probs = UniformLogProbs();
    segment.steps.push_back(std::move(pad));
  }
}

void ValidateSegment(const TrajectorySegment& seg, std::size_t length) {
  auto fail = [](const std::string& what) { throw UsageError("malformed segment: " + what); };
  if (seg.steps.size() != length) {
    fail("length " + std::to_string(seg.steps.size()) + " != " + std::to_string(length));
  }
  if (seg.valid_length == 0 || seg.valid_length > length) fail("valid_length out of range");
  const std::size_t cells = seg.bootstrap_observation.view.size();
  for (std::size_t t = 0; t < length; ++t) {
    const SegmentStep& s = seg.steps[t];
    if (s.observation.view.size() != cells) fail("observation size mismatch");
    if (s.behavior_log_probs.size() != static_cast<std::size_t>(env::kActionLogits)) {
      fail("behavior log-probabilities must have 44 entries");
    }
    for (double lp : s.behavior_log_probs) {
      if (!std::isfinite(lp)) fail("non-finite behavior log-probability");
    }
    if (!std::isfinite(s.reward) || !std::isfinite(s.behavior_value)) fail("non-finite value");
    if (!s.action.IsValid()) fail("action out of range");
    if (t < seg.valid_length) {
      if (s.done && t + 1 != seg.valid_length) fail("done before the last valid step");
    } else if (!s.done || s.reward != 0.0) {
      fail("padding step must be done with zero reward");
    }
  }
  if (seg.actor_state.h.rows() != 1 || seg.actor_state.h.shape() != seg.actor_state.c.shape()) {
    fail("actor recurrent state must be a single row");
  }
  if (seg.critic_state.h.shape() != seg.critic_state.c.shape()) {
    fail("critic recurrent state mismatch");
  }
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t segment_length)
    : capacity_(capacity), segment_length_(segment_length) {
  if (capacity == 0) throw ConfigurationError("replay capacity must be positive");
  if (segment_length == 0) throw ConfigurationError("segment length must be positive");
  ring_.reserve(capacity);
}

void ReplayBuffer::Push(SegmentPtr segment) {
  if (!segment) throw UsageError("ReplayBuffer::Push: null segment");
  ValidateSegment(*segment, segment_length_);
  const std::size_t bytes = segment->ApproxBytes();
  std::lock_guard lock(mutex_);
  if (ring_.size() < capacity_) {
    ring_.push_back(std::move(segment));
  } else {
    stored_bytes_ -= ring_[cursor_]->ApproxBytes();
    ring_[cursor_] = std::move(segment);
  }
  stored_bytes_ += bytes;
  cursor_ = (cursor_ + 1) % capacity_;
  ++total_written_;
}

std::vector<SegmentPtr> ReplayBuffer::Sample(std::size_t n, std::mt19937_64& rng) const {
  std::vector<SegmentPtr> out;
  if (n == 0) return out;
  std::lock_guard lock(mutex_);
  if (ring_.empty()) throw UnavailableError("replay buffer is empty");
  std::uniform_int_distribution<std::size_t> pick(0, ring_.size() - 1);
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(ring_[pick(rng)]);
  return out;
}

std::size_t ReplayBuffer::size() const {
  std::lock_guard lock(mutex_);
  return ring_.size();
}

std::uint64_t ReplayBuffer::total_written() const {
  std::lock_guard lock(mutex_);
  return total_written_;
}

std::size_t ReplayBuffer::StoredBytes() const {
  std::lock_guard lock(mutex_);
  return stored_bytes_;
}

std::vector<SegmentPtr> ReplayBuffer::Contents() const {
  std::lock_guard lock(mutex_);
  std::vector<SegmentPtr> out;
  out.reserve(ring_.size());
  const std::size_t start = ring_.size() < capacity_ ? 0 : cursor_;
  for (std::size_t i = 0; i < ring_.size(); ++i) out.push_back(ring_[(start + i) % ring_.size()]);
  return out;
}

std::size_t MixedBatch::CountOf(rl::SampleSource source) const {
  std::size_t n = 0;
  for (auto s : sources) n += s == source;
  return n;
}

MixedBatch ComposeBatch(const std::vector<SegmentPtr>& online, int ratio,
                        const ReplayBuffer* buffer, std::mt19937_64& rng) {
  if (ratio < 0) throw UsageError("ComposeBatch: replay ratio must be >= 0");
  if (online.empty()) throw UsageError("ComposeBatch: no online segments");
  MixedBatch batch;
  batch.segments = online;
  batch.sources.assign(online.size(), rl::SampleSource::kOnline);
  if (ratio == 0 || buffer == nullptr) return batch;
  const std::size_t wanted = static_cast<std::size_t>(ratio) * online.size();
  std::vector<SegmentPtr> replayed;
  try {
    replayed = buffer->Sample(wanted, rng);
  } catch (const UnavailableError&) {
    LogWarning("replay buffer empty; using an online-only batch");
    return batch;
  }
  for (auto& seg : replayed) {
    batch.segments.push_back(std::move(seg));
    batch.sources.push_back(rl::SampleSource::kReplay);
  }
  return batch;
}

}  // namespace chaincraft::replay
