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

#ifndef CHAINCRAFT_TESTS_FIXTURES_HPP_
#define CHAINCRAFT_TESTS_FIXTURES_HPP_

#include <cmath>
#include <random>
#include <vector>

#include "chaincraft/agent/distribution.hpp"
#include "chaincraft/agent/features.hpp"
#include "chaincraft/agent/network.hpp"
#include "chaincraft/env/expert.hpp"
#include "chaincraft/nn/tape.hpp"
#include "chaincraft/rl/losses.hpp"

namespace chaincraft::fixture {

inline nn::RealArray RandomArray(nn::Shape shape, nn::Rng& rng, double bound = 1.0) {
  nn::RealArray out(std::move(shape));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : out.data()) v = dist(rng);
  return out;
}

// Weighted sum with fixed random weights, so every output element matters.
inline nn::Var Project(nn::Var y, std::uint64_t seed) {
  nn::Rng rng(seed);
  return nn::Dot(y, RandomArray(y.shape(), rng));
}

inline agent::ComposedDistribution RandomDistribution(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  agent::ComposedDistribution d;
  for (int h = 0; h < env::kHeadCount; ++h) {
    std::vector<double> logits(static_cast<std::size_t>(env::kHeadSizes[h]));
    double max = -1e300;
    for (double& v : logits) {
      v = normal(rng);
      max = std::max(max, v);
    }
    double z = 0.0;
    for (double v : logits) z += std::exp(v - max);
    for (double& v : logits) v = v - max - std::log(z);
    d.log_probs[h] = logits;
  }
  return d;
}

// Small network that keeps finite-difference checks cheap.
inline agent::NetworkConfig TinyConfig(agent::EncoderKind encoder) {
  agent::NetworkConfig c;
  c.encoder = encoder;
  c.residual_blocks = 1;
  c.convs_per_block = 1;
  c.channels = 2;
  c.spatial_units = 4;
  c.nonspatial_units = {4};
  c.lstm_hidden = 4;
  c.inventory_units = {3};
  c.view_side = 3;
  return c;
}

// Observations from noisy expert play with a 3x3 view.
inline std::vector<env::Observation> RandomObservations(std::size_t n, std::uint64_t seed) {
  env::EnvConfig config;
  config.view_radius = 1;
  std::mt19937_64 rng(seed);
  env::WorldState s = env::Reset(seed, config);
  std::vector<env::Observation> out;
  while (out.size() < n) {
    if (s.done) s = env::Reset(rng(), config);
    env::Step(s, env::ScriptedExpert(s, 0.5, rng));
    out.push_back(env::Observe(s));
  }
  return out;
}

inline agent::FeatureBatch Features(const std::vector<env::Observation>& obs) {
  std::vector<const env::Observation*> ptrs;
  for (const auto& o : obs) ptrs.push_back(&o);
  return agent::Featurize(ptrs);
}

// Moves every parameter off exact zeros so ReLU inputs avoid the kink.
inline void Jitter(nn::ParameterSet& params, std::mt19937_64& rng, double scale = 0.05) {
  std::normal_distribution<double> jitter(0.0, scale);
  for (auto& [name, p] : params) {
    for (double& v : p.value.data()) v += jitter(rng);
  }
}

// Full actor-critic objective with V-trace targets held constant. Terms the
// network's role cannot produce are left out.
inline double ActorCriticLoss(agent::AgentNetwork& net, const std::vector<env::Observation>& obs,
                              const std::vector<env::ComposedAction>& actions, std::size_t steps,
                              const nn::RealArray& replay_lp, bool backward) {
  const std::size_t n = obs.size();
  nn::Tape tape;
  const agent::NetworkOutput out =
      net.Forward(tape, Features(obs), steps, net.InitialState(n / steps));
  std::vector<double> rhos(n), adv(n), targets(n), mask(n, 1.0), stored(n);
  std::vector<rl::SampleSource> sources(n, rl::SampleSource::kReplay);
  for (std::size_t i = 0; i < n; ++i) {
    rhos[i] = 0.5 + 0.1 * double(i % 5);
    adv[i] = std::sin(double(i) + 0.3);
    targets[i] = std::cos(double(i));
    stored[i] = 0.2 * double(i % 3);
  }
  rl::LossComponents comps;
  if (out.has_policy()) {
    const rl::HeadLogProbs& lps = out.head_log_probs;
    comps.policy_gradient =
        rl::PolicyGradientLoss(rl::JointLogProb(lps, actions), rhos, adv, mask, false);
    comps.negative_entropy = rl::NegativeEntropy(lps, mask);
    if (out.has_value()) {
      const rl::ClearTerms clear =
          rl::ClearLosses(lps, replay_lp, out.values, stored, sources, mask);
      comps.policy_cloning = clear.policy_cloning;
      comps.value_cloning = clear.value_cloning;
    } else {
      // Actor only: value inputs are constants, so only the KL term reaches
      // the parameters.
      nn::Var fixed = tape.Constant(nn::RealArray({n, 1}, stored));
      comps.policy_cloning =
          rl::ClearLosses(lps, replay_lp, fixed, stored, sources, mask).policy_cloning;
    }
  }
  if (out.has_value()) {
    comps.value = rl::ValueLoss(out.values, targets, mask);
    if (!out.has_policy()) {
      // Critic only: a constant policy leaves the value term alone.
      nn::Var logits = tape.Constant(replay_lp);
      rl::HeadLogProbs fixed;
      std::size_t offset = 0;
      for (int h = 0; h < env::kHeadCount; ++h) {
        const auto k = static_cast<std::size_t>(env::kHeadSizes[h]);
        fixed[h] = nn::LogSoftmax(nn::SliceCols(logits, offset, k));
        offset += k;
      }
      comps.value_cloning =
          rl::ClearLosses(fixed, replay_lp, out.values, stored, sources, mask).value_cloning;
    }
  }
  nn::Var total = rl::TotalLoss(tape, comps, {1.0, 0.5, 0.01, 0.3, 0.2});
  if (backward) tape.Backward(total);
  return total.value()[0];
}

}  // namespace chaincraft::fixture

#endif  // CHAINCRAFT_TESTS_FIXTURES_HPP_
