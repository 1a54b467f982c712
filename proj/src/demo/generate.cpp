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

#include <random>

#include "chaincraft/demo/demos.hpp"
#include "chaincraft/env/expert.hpp"
#include "chaincraft/errors.hpp"
#include "chaincraft/seeding.hpp"

namespace chaincraft::demo {
namespace {

DemoEpisode Rollout(std::uint64_t seed, const env::EnvConfig& config, double noise) {
  DemoEpisode episode;
  episode.seed = seed;
  episode.turn_granularity_deg = config.turn_granularity_deg;
  env::WorldState state = env::Reset(seed, config);
  std::mt19937_64 rng(SplitMix(seed ^ 0xD3E40ULL));
  while (!state.done) {
    env::ComposedAction action = env::ScriptedExpert(state, noise, rng);
    action[env::kStep] = 0;
    DemoFrame frame;
    frame.observation = env::Observe(state);
    frame.action = action;
    env::StepOutcome outcome = env::Step(state, action);
    frame.reward = outcome.reward;
    episode.episode_return += outcome.reward;
    episode.events.insert(episode.events.end(), outcome.events.begin(),
                          outcome.events.end());
    episode.frames.push_back(std::move(frame));
  }
  return episode;
}

}  // namespace

std::vector<DemoEpisode> GenerateDemos(int count, std::uint64_t base_seed,
                                       const env::EnvConfig& env_config,
                                       const DemoOptions& options) {
  if (count < 1) throw ConfigurationError("gen-demos: count must be >= 1");
  if (options.noise_level < 0.0 || options.noise_level > 1.0) {
    throw ConfigurationError("gen-demos: noise must be in [0, 1]");
  }
  env::EnvConfig config = env_config;
  if (options.fine_rotation) config.turn_granularity_deg = 10;
  config.Validate();
  std::vector<DemoEpisode> episodes;
  episodes.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    bool accepted = false;
    for (int attempt = 0; attempt < options.max_attempts_per_episode; ++attempt) {
      const std::uint64_t seed =
          SplitMix(base_seed * 1000003ULL + static_cast<std::uint64_t>(i) * 131ULL +
                   static_cast<std::uint64_t>(attempt));
      DemoEpisode episode = Rollout(seed, config, options.noise_level);
      if (!episode.events.empty() && episode.events.front().milestone == 0) {
        episodes.push_back(std::move(episode));
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw GenerationError("gen-demos: episode " + std::to_string(i) +
                            " never reached the first milestone");
    }
  }
  return episodes;
}

bool ReplayMatches(const DemoEpisode& episode, const env::EnvConfig& env_config) {
  env::EnvConfig config = env_config;
  config.turn_granularity_deg = episode.turn_granularity_deg;
  env::WorldState state = env::Reset(episode.seed, config);
  double total = 0.0;
  for (const DemoFrame& frame : episode.frames) {
    if (state.done) return false;
    if (!(env::Observe(state) == frame.observation)) return false;
    const env::StepOutcome outcome = env::Step(state, frame.action);
    if (outcome.reward != frame.reward) return false;
    total += outcome.reward;
  }
  return state.done && total == episode.episode_return;
}

}  // namespace chaincraft::demo
