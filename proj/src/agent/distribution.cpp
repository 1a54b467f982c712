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

#include "chaincraft/agent/distribution.hpp"

#include <cmath>
#include <string>

#include "chaincraft/errors.hpp"

namespace chaincraft::agent {

ComposedDistribution ComposedDistribution::Uniform() {
  ComposedDistribution d;
  for (int h = 0; h < env::kHeadCount; ++h) {
    const int k = env::kHeadSizes[h];
    d.log_probs[h].assign(static_cast<std::size_t>(k), -std::log(double(k)));
  }
  return d;
}

ComposedDistribution ComposedDistribution::FromFlat(std::span<const double> flat) {
  if (flat.size() != env::kActionLogits) {
    throw UsageError("ComposedDistribution: expected 44 log-probabilities");
  }
  ComposedDistribution d;
  std::size_t offset = 0;
  for (int h = 0; h < env::kHeadCount; ++h) {
    const auto k = static_cast<std::size_t>(env::kHeadSizes[h]);
    d.log_probs[h].assign(flat.begin() + offset, flat.begin() + offset + k);
    offset += k;
  }
  return d;
}

std::vector<double> ComposedDistribution::Flat() const {
  std::vector<double> flat;
  flat.reserve(env::kActionLogits);
  for (const auto& head : log_probs) flat.insert(flat.end(), head.begin(), head.end());
  return flat;
}

double ComposedDistribution::HeadLogProb(int head, int value) const {
  if (head < 0 || head >= env::kHeadCount) throw UsageError("head index out of range");
  const auto& lp = log_probs[head];
  if (value < 0 || static_cast<std::size_t>(value) >= lp.size()) {
    throw UsageError("action value " + std::to_string(value) + " out of range for head " +
                     env::kHeadNames[head]);
  }
  return lp[static_cast<std::size_t>(value)];
}

double ComposedDistribution::LogProb(const env::ComposedAction& action) const {
  double total = 0.0;
  for (int h = 0; h < env::kHeadCount; ++h) total += HeadLogProb(h, action[h]);
  return total;
}

double ComposedDistribution::HeadEntropy(int head) const {
  double h = 0.0;
  for (double lp : log_probs[head]) {
    const double p = std::exp(lp);
    if (p > 0.0) h -= p * lp;
  }
  return h;
}

double ComposedDistribution::Entropy() const {
  double total = 0.0;
  for (int h = 0; h < env::kHeadCount; ++h) total += HeadEntropy(h);
  return total;
}

env::ComposedAction ComposedDistribution::Sample(std::mt19937_64& rng) const {
  env::ComposedAction action;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int h = 0; h < env::kHeadCount; ++h) {
    const auto& lp = log_probs[h];
    double u = unit(rng);
    int chosen = static_cast<int>(lp.size()) - 1;
    for (std::size_t k = 0; k < lp.size(); ++k) {
      u -= std::exp(lp[k]);
      if (u < 0.0) {
        chosen = static_cast<int>(k);
        break;
      }
    }
    // Never pick a zero-probability class through rounding at the tail.
    while (chosen > 0 && std::exp(lp[static_cast<std::size_t>(chosen)]) == 0.0) --chosen;
    action[h] = chosen;
  }
  return action;
}

env::ComposedAction ComposedDistribution::Greedy() const {
  env::ComposedAction action;
  for (int h = 0; h < env::kHeadCount; ++h) {
    const auto& lp = log_probs[h];
    std::size_t best = 0;
    for (std::size_t k = 1; k < lp.size(); ++k) {
      if (lp[k] > lp[best]) best = k;
    }
    action[h] = static_cast<int>(best);
  }
  return action;
}

void ComposedDistribution::Validate(double tolerance) const {
  for (int h = 0; h < env::kHeadCount; ++h) {
    const auto& lp = log_probs[h];
    if (lp.size() != static_cast<std::size_t>(env::kHeadSizes[h])) {
      throw UsageError(std::string("distribution head ") + env::kHeadNames[h] +
                       " has the wrong size");
    }
    double sum = 0.0;
    for (double v : lp) {
      if (std::isnan(v) || v > 1e-12) throw UsageError("invalid log-probability");
      sum += std::exp(v);
    }
    if (std::abs(sum - 1.0) > tolerance) {
      throw UsageError(std::string("distribution head ") + env::kHeadNames[h] +
                       " does not sum to one");
    }
  }
}

double KlDivergence(const ComposedDistribution& p, const ComposedDistribution& q) {
  double total = 0.0;
  for (int h = 0; h < env::kHeadCount; ++h) {
    const auto& lp = p.log_probs[h];
    const auto& lq = q.log_probs[h];
    if (lp.size() != lq.size()) throw UsageError("KL: head structure mismatch");
    for (std::size_t k = 0; k < lp.size(); ++k) {
      const double pk = std::exp(lp[k]);
      if (pk > 0.0) total += pk * (lp[k] - lq[k]);
    }
  }
  return total;
}

}  // namespace chaincraft::agent
