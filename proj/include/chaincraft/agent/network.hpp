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

#ifndef CHAINCRAFT_AGENT_NETWORK_HPP_
#define CHAINCRAFT_AGENT_NETWORK_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "chaincraft/agent/distribution.hpp"
#include "chaincraft/agent/features.hpp"
#include "chaincraft/env/chaincraft.hpp"
#include "chaincraft/nn/layers.hpp"
#include "chaincraft/nn/parameter_set.hpp"
#include "chaincraft/nn/tape.hpp"

namespace chaincraft::agent {

enum class EncoderKind { kResidual, kMlp };

struct NetworkConfig {
  EncoderKind encoder = EncoderKind::kResidual;
  int residual_blocks = 2;
  int convs_per_block = 2;
  int channels = 16;
  int spatial_units = 64;
  std::vector<int> nonspatial_units = {64, 32};
  int lstm_hidden = 64;
  bool inventory_subnet = true;
  std::vector<int> inventory_units = {64, 32};
  int view_side = 5;

  // Throws ConfigurationError on non-positive sizes.
  void Validate() const;
  bool operator==(const NetworkConfig&) const = default;
};

// kActor: policy heads only. kCritic: value head only. kShared: one trunk
// carrying both.
enum class NetworkRole { kActor, kCritic, kShared };

struct RecurrentState {
  nn::RealArray h;  // [B x hidden]
  nn::RealArray c;  // [B x hidden]

  static RecurrentState Zero(std::size_t batch, std::size_t hidden);
  std::size_t batch() const { return h.rows(); }
  // Row `b` as a batch of one.
  RecurrentState Row(std::size_t b) const;
  static RecurrentState Stack(std::span<const RecurrentState> rows);
  bool operator==(const RecurrentState&) const = default;
};

// Forward pass over a time-major sequence: row t * batch + b.
struct NetworkOutput {
  std::size_t steps = 0;
  std::size_t batch = 0;
  std::array<nn::Var, env::kHeadCount> head_log_probs;  // [T*B x size]
  nn::Var values;                                        // [T*B x 1]
  RecurrentState final_state;

  bool has_policy() const { return head_log_probs[0].valid(); }
  bool has_value() const { return values.valid(); }
  ComposedDistribution Distribution(std::size_t row) const;
  double Value(std::size_t row) const;
};

// Plain values from an untaped single step.
struct StepResult {
  std::vector<ComposedDistribution> distributions;  // empty for a critic
  std::vector<double> values;                       // empty for an actor
  RecurrentState state;
};

class AgentNetwork {
 public:
  AgentNetwork() = default;
  AgentNetwork(const NetworkConfig& config, NetworkRole role, std::string prefix,
               std::uint64_t seed);

  const NetworkConfig& config() const { return config_; }
  NetworkRole role() const { return role_; }
  const std::string& prefix() const { return prefix_; }
  bool has_policy() const { return role_ != NetworkRole::kCritic; }
  bool has_value() const { return role_ != NetworkRole::kActor; }
  std::size_t hidden() const { return static_cast<std::size_t>(config_.lstm_hidden); }

  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }

  // `features` holds T*B rows in time-major order. Throws ConfigurationError
  // when the feature or state shapes do not match.
  NetworkOutput Forward(nn::Tape& tape, const FeatureBatch& features, std::size_t steps,
                        const RecurrentState& initial_state);

  // Untaped single step for a batch of observations.
  StepResult Step(const FeatureBatch& features, const RecurrentState& state);

  RecurrentState InitialState(std::size_t batch = 1) const {
    return RecurrentState::Zero(batch, hidden());
  }

  // Loads every parameter of this network whose name is present in `source`;
  // returns the number copied. Shapes must agree.
  std::size_t LoadMatching(const nn::ParameterSet& source);

 private:
  std::string Name(const std::string& leaf) const { return prefix_ + leaf; }
  nn::Var EncodeSpatial(nn::Tape& tape, const FeatureBatch& features);

  NetworkConfig config_;
  NetworkRole role_ = NetworkRole::kActor;
  std::string prefix_;
  nn::ParameterSet params_;
};

inline constexpr bool UsesInventory(int head) {
  return head == env::kCraft || head == env::kSmelt;
}

}  // namespace chaincraft::agent

#endif  // CHAINCRAFT_AGENT_NETWORK_HPP_
