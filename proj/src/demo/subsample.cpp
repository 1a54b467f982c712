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

#include <algorithm>
#include <cmath>

#include "chaincraft/demo/demos.hpp"

namespace chaincraft::demo {
namespace {

using env::ComposedAction;
using env::Observation;

// One input unit: `frames` consecutive frames of the same atomic action.
struct Unit {
  const Observation* observation;
  ComposedAction action;
  std::size_t frames;
};

bool IsPureTurn(const ComposedAction& a) {
  return a[env::kTurn] != env::kTurnNone && a.ActiveHeadCount() == 1;
}

int LargestMultiplierAtMost(std::size_t frames) {
  int best = env::kStepMultipliers.front();
  for (int m : env::kStepMultipliers) {
    if (static_cast<std::size_t>(m) <= frames) best = m;
  }
  return best;
}

SubsampledEpisode Run(const std::vector<Unit>& input, std::uint64_t source_id,
                      std::uint32_t original_length, int granularity_deg,
                      const SubsampleConfig& config, SubsampleStats* stats_out) {
  SubsampleStats stats;
  stats.original_frames = original_length;

  // Rules 1 and 2.
  std::vector<Unit> kept;
  kept.reserve(input.size());
  for (const Unit& u : input) {
    if (u.action.IsNoOp()) {
      stats.dropped_noop += u.frames;
      continue;
    }
    Unit stripped = u;
    for (int head : config.excluded_heads) {
      if (head >= 0 && head < env::kHeadCount && head != env::kStep) stripped.action[head] = 0;
    }
    if (stripped.action.IsNoOp()) {
      stats.dropped_excluded += u.frames;
      continue;
    }
    stripped.action[env::kStep] = 0;
    kept.push_back(stripped);
  }

  // Rule 4: accumulate pure turns into threshold-sized units.
  std::vector<Unit> turned;
  turned.reserve(kept.size());
  int accumulated = 0;
  int direction = env::kTurnNone;
  std::size_t absorbed = 0;
  const Observation* first_obs = nullptr;
  const int threshold = config.turn_threshold_deg;
  auto flush = [&]() {
    if (absorbed == 0) return;
    if (2 * std::abs(accumulated) >= threshold) {
      turned.push_back({first_obs, env::MakeAction(env::kTurn, direction), 1});
      stats.dropped_turn += absorbed - 1;
    } else {
      stats.dropped_turn += absorbed;
    }
    accumulated = 0;
    absorbed = 0;
    first_obs = nullptr;
  };
  for (const Unit& u : kept) {
    if (!IsPureTurn(u.action)) {
      flush();
      turned.push_back(u);
      continue;
    }
    const int dir = u.action[env::kTurn];
    if (absorbed > 0 && dir != direction) flush();
    direction = dir;
    for (std::size_t f = 0; f < u.frames; ++f) {
      if (absorbed == 0) first_obs = u.observation;
      accumulated += granularity_deg;
      ++absorbed;
      if (accumulated >= threshold) {
        turned.push_back({first_obs, env::MakeAction(env::kTurn, direction), 1});
        stats.dropped_turn += absorbed - 1;
        accumulated = 0;
        absorbed = 0;
        first_obs = nullptr;
      }
    }
  }
  flush();

  // Rule 3: collapse runs of the same atomic action.
  SubsampledEpisode out;
  out.source_id = source_id;
  out.original_length = original_length;
  for (std::size_t i = 0; i < turned.size();) {
    std::size_t j = i;
    std::size_t total = 0;
    // Observation at the first frame of each unit in the run.
    std::vector<std::pair<std::size_t, const Observation*>> starts;
    while (j < turned.size() && turned[j].action.SameAtomic(turned[i].action)) {
      starts.emplace_back(total, turned[j].observation);
      total += turned[j].frames;
      ++j;
    }
    std::size_t emitted = 0;
    while (emitted < total) {
      const int m = LargestMultiplierAtMost(total - emitted);
      const Observation* obs = starts.front().second;
      for (const auto& [offset, o] : starts) {
        if (offset <= emitted) obs = o;
      }
      SubsampledRecord record;
      record.observation = *obs;
      record.action = turned[i].action;
      record.action[env::kStep] = env::MultiplierIndex(m);
      out.records.push_back(std::move(record));
      emitted += static_cast<std::size_t>(m);
    }
    i = j;
  }

  // The agent sees its own previous compressed action.
  ComposedAction previous = env::NoOp();
  for (SubsampledRecord& r : out.records) {
    r.observation.previous_action = previous;
    previous = r.action;
  }

  if (out.records.size() > config.truncation) {
    for (std::size_t k = config.truncation; k < out.records.size(); ++k) {
      stats.dropped_truncation += static_cast<std::size_t>(out.records[k].action.multiplier());
    }
    out.records.resize(config.truncation);
  }
  for (const SubsampledRecord& r : out.records) {
    stats.emitted_frames += static_cast<std::size_t>(r.action.multiplier());
  }
  if (stats_out != nullptr) *stats_out = stats;
  return out;
}

}  // namespace

SubsampledEpisode Subsample(const DemoEpisode& episode, const SubsampleConfig& config,
                            SubsampleStats* stats) {
  std::vector<Unit> units;
  units.reserve(episode.frames.size());
  for (const DemoFrame& f : episode.frames) {
    ComposedAction a = f.action;
    a[env::kStep] = 0;
    units.push_back({&f.observation, a, 1});
  }
  return Run(units, episode.seed, static_cast<std::uint32_t>(episode.frames.size()),
             episode.turn_granularity_deg, config, stats);
}

SubsampledEpisode Subsample(const SubsampledEpisode& episode,
                            const SubsampleConfig& config, SubsampleStats* stats) {
  std::vector<Unit> units;
  units.reserve(episode.records.size());
  std::size_t frames = 0;
  for (const SubsampledRecord& r : episode.records) {
    ComposedAction a = r.action;
    const auto m = static_cast<std::size_t>(a.multiplier());
    a[env::kStep] = 0;
    units.push_back({&r.observation, a, m});
    frames += m;
  }
  SubsampledEpisode out = Run(units, episode.source_id, static_cast<std::uint32_t>(frames),
                              config.turn_threshold_deg, config, stats);
  out.original_length = episode.original_length;
  return out;
}

}  // namespace chaincraft::demo
