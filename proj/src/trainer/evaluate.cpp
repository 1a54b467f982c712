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

#include "chaincraft/trainer/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chaincraft/env/expert.hpp"
#include "chaincraft/errors.hpp"
#include "chaincraft/seeding.hpp"

namespace chaincraft::trainer {

env::ComposedAction ExpertPolicy::Act(const env::WorldState& state, std::mt19937_64&) {
  return env::PlannerAction(state);
}

env::ComposedAction RandomPolicy::Act(const env::WorldState&, std::mt19937_64& rng) {
  return env::RandomAction(rng);
}

NetworkPolicy::NetworkPolicy(agent::AgentNetwork network, bool greedy)
    : network_(std::move(network)), state_(network_.InitialState()), greedy_(greedy) {
  if (!network_.has_policy()) throw UsageError("NetworkPolicy: network has no policy heads");
}

void NetworkPolicy::BeginEpisode() { state_ = network_.InitialState(); }

env::ComposedAction NetworkPolicy::Act(const env::WorldState& state, std::mt19937_64& rng) {
  const env::Observation obs = env::Observe(state);
  agent::StepResult step = network_.Step(agent::Featurize(obs), state_);
  state_ = std::move(step.state);
  const agent::ComposedDistribution& dist = step.distributions[0];
  return greedy_ ? dist.Greedy() : dist.Sample(rng);
}

void EvalConfig::Validate() const {
  if (episodes < 1) throw ConfigurationError("eval.episodes must be >= 1");
}

nlohmann::json EvalReport::ToJson() const {
  return {{"episodes", episodes}, {"mean", mean},           {"std", std},
          {"max", max},           {"min", min},             {"reward_frequency", reward_frequency},
          {"returns", returns}};
}

EvalReport EvalReport::FromJson(const nlohmann::json& j) {
  EvalReport r;
  r.episodes = j.at("episodes").get<int>();
  r.mean = j.at("mean").get<double>();
  r.std = j.at("std").get<double>();
  r.max = j.at("max").get<double>();
  r.min = j.at("min").get<double>();
  r.reward_frequency = j.at("reward_frequency").get<std::array<double, env::kMilestoneCount>>();
  r.returns = j.at("returns").get<std::vector<double>>();
  return r;
}

std::uint64_t EvalEpisodeSeed(std::uint64_t seed_base, int episode) {
  return DeriveSeed(seed_base, {0xE7A1ULL, static_cast<std::uint64_t>(episode)});
}

double Mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double SampleStd(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = Mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

EvalReport Evaluate(Policy& policy, const env::EnvConfig& env_config, const EvalConfig& config) {
  config.Validate();
  EvalReport report;
  report.episodes = config.episodes;
  std::array<int, env::kMilestoneCount> hits{};
  for (int e = 0; e < config.episodes; ++e) {
    const std::uint64_t seed = EvalEpisodeSeed(config.seed_base, e);
    env::WorldState state = env::Reset(seed, env_config);
    std::mt19937_64 rng(SplitMix(seed));
    policy.BeginEpisode();
    double ret = 0.0;
    while (!state.done) ret += env::Step(state, policy.Act(state, rng)).reward;
    for (int k = 0; k < env::kMilestoneCount; ++k) hits[k] += state.HasMilestone(k);
    report.returns.push_back(ret);
  }
  report.mean = Mean(report.returns);
  report.std = SampleStd(report.returns);
  report.max = *std::max_element(report.returns.begin(), report.returns.end());
  report.min = *std::min_element(report.returns.begin(), report.returns.end());
  for (int k = 0; k < env::kMilestoneCount; ++k) {
    report.reward_frequency[k] = static_cast<double>(hits[k]) / config.episodes;
  }
  return report;
}

agent::AgentNetwork PolicyNetworkFrom(const nn::ParameterSet& params,
                                      const agent::NetworkConfig& config) {
  agent::AgentNetwork net(config, agent::NetworkRole::kActor, "actor/", 0);
  const std::size_t copied = net.LoadMatching(params);
  if (copied != net.params().size()) {
    throw ConfigurationError("checkpoint is missing " +
                             std::to_string(net.params().size() - copied) +
                             " policy parameters for this network configuration");
  }
  return net;
}

}  // namespace chaincraft::trainer
