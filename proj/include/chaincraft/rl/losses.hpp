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

#ifndef CHAINCRAFT_RL_LOSSES_HPP_
#define CHAINCRAFT_RL_LOSSES_HPP_

#include <array>
#include <limits>
#include <span>
#include <vector>

#include "chaincraft/agent/distribution.hpp"
#include "chaincraft/env/chaincraft.hpp"
#include "chaincraft/nn/tape.hpp"

namespace chaincraft::rl {

struct VTraceInput {
  std::vector<double> rewards;
  std::vector<double> discounts;  // 0 after a terminal step
  std::vector<double> behavior_log_probs;
  std::vector<double> target_log_probs;
  std::vector<double> values;
  double bootstrap_value = 0.0;
  double rho_bar = 1.0;
  double c_bar = 1.0;
};

struct VTraceResult {
  std::vector<double> targets;     // v_t
  std::vector<double> advantages;  // r_t + gamma_t v_{t+1} - V(s_t)
  std::vector<double> rhos;        // min(rho_bar, pi / mu)

  std::vector<double> ClippedAdvantages() const;
};

// Backward recursion from the bootstrap value. Throws UsageError on length
// mismatch, an empty sequence, or invalid truncation levels.
VTraceResult VTrace(const VTraceInput& input);

inline constexpr double kNoTruncation = std::numeric_limits<double>::infinity();

enum class SampleSource : std::uint8_t { kOnline = 0, kReplay = 1 };

using HeadLogProbs = std::array<nn::Var, env::kHeadCount>;

// Per-row joint log-probability of `actions`: sum of the head entries. [N x 1]
nn::Var JointLogProb(const HeadLogProbs& head_log_probs,
                     std::span<const env::ComposedAction> actions);

// Masked means below divide by the number of rows with mask != 0. Rows with
// a zero mask receive exactly zero gradient. Coefficients are constants.

// mean of -rho_t * A_t * log pi(a_t | s_t); A_t replaced by max(A_t, 0) when
// clipping.
nn::Var PolicyGradientLoss(nn::Var action_log_probs, std::span<const double> rhos,
                           std::span<const double> advantages, std::span<const double> mask,
                           bool clip_advantage);

// mean of 0.5 * (v_t - V(s_t))^2.
nn::Var ValueLoss(nn::Var values, std::span<const double> targets, std::span<const double> mask);

// mean of sum_heads sum_k p log p, i.e. the negated entropy.
nn::Var NegativeEntropy(const HeadLogProbs& head_log_probs, std::span<const double> mask);

struct ClearTerms {
  nn::Var policy_cloning;  // mean KL between replayed and current policies
  nn::Var value_cloning;   // mean (V(s_t) - V_behavior)^2
};

// `replay_log_probs` is [N x 44] of recording-time log-probabilities. Throws
// UsageError if any row with a nonzero mask is tagged online, or if the mask
// selects nothing.
ClearTerms ClearLosses(const HeadLogProbs& current_log_probs, const nn::RealArray& replay_log_probs,
                       nn::Var current_values, std::span<const double> replay_values,
                       std::span<const SampleSource> sources, std::span<const double> mask,
                       agent::KlDirection direction = agent::KlDirection::kReplayToCurrent);

struct LossWeights {
  double policy_gradient = 1.0;
  double value = 0.5;
  double entropy = 0.01;
  double policy_cloning = 0.01;
  double value_cloning = 0.005;
  bool operator==(const LossWeights&) const = default;
};

// Components left invalid are disabled and contribute nothing.
struct LossComponents {
  nn::Var policy_gradient;
  nn::Var value;
  nn::Var negative_entropy;
  nn::Var policy_cloning;
  nn::Var value_cloning;
};

nn::Var TotalLoss(nn::Tape& tape, const LossComponents& components, const LossWeights& weights);

}  // namespace chaincraft::rl

#endif  // CHAINCRAFT_RL_LOSSES_HPP_
