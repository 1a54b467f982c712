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

#ifndef CHAINCRAFT_TRAINER_EVALUATE_HPP_
#define CHAINCRAFT_TRAINER_EVALUATE_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chaincraft/agent/network.hpp"
#include "chaincraft/env/chaincraft.hpp"

namespace chaincraft::trainer {

class Policy {
 public:
  virtual ~Policy() = default;
  virtual void BeginEpisode() {}
  virtual env::ComposedAction Act(const env::WorldState& state, std::mt19937_64& rng) = 0;
};

class ExpertPolicy : public Policy {
 public:
  env::ComposedAction Act(const env::WorldState& state, std::mt19937_64& rng) override;
};

class RandomPolicy : public Policy {
 public:
  env::ComposedAction Act(const env::WorldState& state, std::mt19937_64& rng) override;
};

// Acts from observations only, carrying the LSTM state through the episode.
class NetworkPolicy : public Policy {
 public:
  NetworkPolicy(agent::AgentNetwork network, bool greedy);
  void BeginEpisode() override;
  env::ComposedAction Act(const env::WorldState& state, std::mt19937_64& rng) override;

 private:
  agent::AgentNetwork network_;
  agent::RecurrentState state_;
  bool greedy_;
};

struct EvalConfig {
  int episodes = 100;
  std::uint64_t seed_base = 1000003;
  bool greedy = true;

  void Validate() const;
  bool operator==(const EvalConfig&) const = default;
};

struct EvalReport {
  int episodes = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  double max = 0.0;
  double min = 0.0;
  std::array<double, env::kMilestoneCount> reward_frequency{};
  std::vector<double> returns;

  nlohmann::json ToJson() const;
  static EvalReport FromJson(const nlohmann::json& j);
};

// Evaluation maps are drawn from a seed stream disjoint from training maps.
std::uint64_t EvalEpisodeSeed(std::uint64_t seed_base, int episode);

EvalReport Evaluate(Policy& policy, const env::EnvConfig& env_config, const EvalConfig& config);

// Loads the "actor/" policy parameters of `params` into a fresh actor network.
agent::AgentNetwork PolicyNetworkFrom(const nn::ParameterSet& params,
                                      const agent::NetworkConfig& config);

double Mean(const std::vector<double>& xs);
double SampleStd(const std::vector<double>& xs);

}  // namespace chaincraft::trainer

#endif  // CHAINCRAFT_TRAINER_EVALUATE_HPP_
