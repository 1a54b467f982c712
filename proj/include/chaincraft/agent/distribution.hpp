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

#ifndef CHAINCRAFT_AGENT_DISTRIBUTION_HPP_
#define CHAINCRAFT_AGENT_DISTRIBUTION_HPP_

#include <array>
#include <random>
#include <span>
#include <vector>

#include "chaincraft/env/chaincraft.hpp"

namespace chaincraft::agent {

// Factorised policy over the composed action heads, stored as per-head
// log-probabilities.
struct ComposedDistribution {
  std::array<std::vector<double>, env::kHeadCount> log_probs;

  static ComposedDistribution Uniform();
  // Takes 44 log-probabilities laid out head after head.
  static ComposedDistribution FromFlat(std::span<const double> flat);
  std::vector<double> Flat() const;

  // Joint log-probability: sum of per-head log-probabilities.
  double LogProb(const env::ComposedAction& action) const;
  double HeadLogProb(int head, int value) const;
  double Entropy() const;
  double HeadEntropy(int head) const;
  env::ComposedAction Sample(std::mt19937_64& rng) const;
  env::ComposedAction Greedy() const;
  // Throws UsageError unless every head is a distribution of the right size.
  void Validate(double tolerance = 1e-9) const;
};

enum class KlDirection { kReplayToCurrent, kCurrentToReplay };

// sum over heads of sum_k p log(p / q). Throws UsageError on a head
// structure mismatch.
double KlDivergence(const ComposedDistribution& p, const ComposedDistribution& q);

}  // namespace chaincraft::agent

#endif  // CHAINCRAFT_AGENT_DISTRIBUTION_HPP_
