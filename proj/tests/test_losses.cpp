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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "chaincraft/agent/distribution.hpp"
#include "chaincraft/env/expert.hpp"
#include "chaincraft/errors.hpp"
#include "chaincraft/rl/losses.hpp"
#include "oracles.hpp"

namespace chaincraft::rl {
namespace {

VTraceInput RandomInput(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> lp(-3.0, 0.0);
  VTraceInput in;
  for (std::size_t t = 0; t < n; ++t) {
    in.rewards.push_back(u(rng) * 5.0);
    in.discounts.push_back(rng() % 7 == 0 ? 0.0 : 0.9 + 0.1 * std::abs(u(rng)));
    in.behavior_log_probs.push_back(lp(rng));
    in.target_log_probs.push_back(lp(rng));
    in.values.push_back(u(rng) * 3.0);
  }
  in.bootstrap_value = u(rng) * 3.0;
  return in;
}

std::vector<double> Ratios(const VTraceInput& in) {
  std::vector<double> r;
  for (std::size_t t = 0; t < in.rewards.size(); ++t)
    r.push_back(std::exp(in.target_log_probs[t] - in.behavior_log_probs[t]));
  return r;
}

TEST(VTrace, MatchesUnrolledSum) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    VTraceInput in = RandomInput(rng, 1 + rng() % 6);
    if (i % 3 == 1) in.rho_bar = 2.0, in.c_bar = 0.5;
    const VTraceResult r = VTrace(in);
    const auto ref = oracle::VTraceUnrolled(in.rewards, in.discounts, Ratios(in), in.values,
                                            in.bootstrap_value, in.rho_bar, in.c_bar);
    const std::size_t n = in.rewards.size();
    for (std::size_t t = 0; t < n; ++t) {
      EXPECT_LT(std::abs(r.targets[t] - ref[t]), 1e-10);
      const double next = t + 1 < n ? ref[t + 1] : in.bootstrap_value;
      EXPECT_LT(std::abs(r.advantages[t] - (in.rewards[t] + in.discounts[t] * next - in.values[t])),
                1e-10);
      EXPECT_EQ(r.rhos[t], std::min(in.rho_bar, Ratios(in)[t]));
    }
  }
}

TEST(VTrace, OnPolicyReducesToNStepReturn) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    VTraceInput in = RandomInput(rng, 1 + rng() % 6);
    in.target_log_probs = in.behavior_log_probs;
    const VTraceResult r = VTrace(in);
    const auto ref = oracle::NStepReturns(in.rewards, in.discounts, in.bootstrap_value);
    for (std::size_t t = 0; t < ref.size(); ++t) EXPECT_LT(std::abs(r.targets[t] - ref[t]), 1e-12);
  }
}

TEST(VTrace, Errors) {
  VTraceInput in;
  EXPECT_THROW(VTrace(in), UsageError);
  std::mt19937_64 rng(3);
  in = RandomInput(rng, 3);
  in.values.pop_back();
  EXPECT_THROW(VTrace(in), UsageError);
  in = RandomInput(rng, 3);
  in.c_bar = -1.0;
  EXPECT_THROW(VTrace(in), UsageError);
}

TEST(VTrace, ClippedAdvantages) {
  VTraceResult r;
  r.advantages = {-1.0, 0.0, 2.5};
  EXPECT_EQ(r.ClippedAdvantages(), (std::vector<double>{0.0, 0.0, 2.5}));
}

struct PolicyBatch {
  nn::ParameterSet params;
  std::vector<env::ComposedAction> actions;
  std::vector<double> rhos;
};

PolicyBatch RandomBatch(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  PolicyBatch b;
  nn::RealArray logits({n, env::kActionLogits});
  for (double& v : logits.data()) v = normal(rng);
  b.params.Add("logits", logits);
  for (std::size_t i = 0; i < n; ++i) {
    b.actions.push_back(env::RandomAction(rng));
    b.rhos.push_back(std::uniform_real_distribution<double>(0.1, 1.0)(rng));
  }
  return b;
}

HeadLogProbs HeadsFrom(nn::Tape& tape, nn::Parameter& logits) {
  nn::Var all = tape.Param(logits);
  HeadLogProbs out;
  std::size_t offset = 0;
  for (int h = 0; h < env::kHeadCount; ++h) {
    const auto k = static_cast<std::size_t>(env::kHeadSizes[h]);
    out[h] = nn::LogSoftmax(nn::SliceCols(all, offset, k));
    offset += k;
  }
  return out;
}

double PgLoss(PolicyBatch& b, const std::vector<double>& adv, const std::vector<double>& mask,
              bool clip, bool backward) {
  nn::Tape tape;
  const HeadLogProbs lps = HeadsFrom(tape, b.params.Get("logits"));
  nn::Var loss = PolicyGradientLoss(JointLogProb(lps, b.actions), b.rhos, adv, mask, clip);
  if (backward) tape.Backward(loss);
  return loss.value()[0];
}

TEST(AdvantageClipping, NonPositiveAdvantagesGetZeroGradient) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    PolicyBatch b = RandomBatch(rng, 8);
    std::vector<double> adv(8), mask(8, 1.0);
    for (std::size_t i = 0; i < 8; ++i) adv[i] = (i % 3 == 0) ? 0.0 : std::normal_distribution<double>()(rng);
    PgLoss(b, adv, mask, true, true);
    const nn::RealArray& g = b.params.Get("logits").grad;
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t k = 0; k < env::kActionLogits; ++k) {
        if (adv[i] <= 0.0) EXPECT_EQ(g.at(i, k), 0.0);
      }
    }
  }
}

TEST(AdvantageClipping, PositiveAdvantagesBitEqual) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    PolicyBatch a = RandomBatch(rng, 6);
    PolicyBatch b = a;
    std::vector<double> adv(6), mask(6, 1.0);
    for (double& v : adv) v = std::uniform_real_distribution<double>(1e-3, 4.0)(rng);
    const double clipped = PgLoss(a, adv, mask, true, true);
    const double plain = PgLoss(b, adv, mask, false, true);
    EXPECT_EQ(clipped, plain);
    EXPECT_EQ(a.params.Get("logits").grad, b.params.Get("logits").grad);
  }
}

TEST(PolicyGradient, MatchesHandFormulaAndMaskedRowsAreSilent) {
  std::mt19937_64 rng(6);
  PolicyBatch b = RandomBatch(rng, 5);
  const std::vector<double> adv = {1.0, -2.0, 0.5, 3.0, -1.0};
  const std::vector<double> mask = {1, 1, 0, 1, 0};
  const double loss = PgLoss(b, adv, mask, false, true);
  double expected = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    if (mask[i] == 0.0) continue;
    double lp = 0.0;
    std::size_t offset = 0;
    for (int h = 0; h < env::kHeadCount; ++h) {
      const auto k = static_cast<std::size_t>(env::kHeadSizes[h]);
      double z = 0.0;
      for (std::size_t j = 0; j < k; ++j) z += std::exp(b.params.Get("logits").value.at(i, offset + j));
      lp += b.params.Get("logits").value.at(i, offset + static_cast<std::size_t>(b.actions[i][h])) - std::log(z);
      offset += k;
    }
    expected += -b.rhos[i] * adv[i] * lp;
  }
  EXPECT_NEAR(loss, expected / 3.0, 1e-12);
  const nn::RealArray& g = b.params.Get("logits").grad;
  for (std::size_t k = 0; k < env::kActionLogits; ++k) {
    EXPECT_EQ(g.at(2, k), 0.0);
    EXPECT_EQ(g.at(4, k), 0.0);
  }
}

TEST(ValueLoss, HalfSquaredError) {
  nn::Tape tape;
  nn::Var v = tape.Constant(nn::RealArray({3, 1}, std::vector<double>{1.0, 2.0, 3.0}));
  const std::vector<double> targets = {0.0, 2.0, 5.0};
  const std::vector<double> mask = {1.0, 1.0, 1.0};
  EXPECT_NEAR(ValueLoss(v, targets, mask).value()[0], (0.5 * 1 + 0 + 0.5 * 4) / 3.0, 1e-15);
}

TEST(Entropy, UniformLogits) {
  PolicyBatch b;
  b.params.Add("logits", nn::RealArray({2, env::kActionLogits}));
  nn::Tape tape;
  const HeadLogProbs lps = HeadsFrom(tape, b.params.Get("logits"));
  const std::vector<double> mask = {1.0, 1.0};
  EXPECT_NEAR(NegativeEntropy(lps, mask).value()[0], -agent::ComposedDistribution::Uniform().Entropy(),
              1e-12);
}

TEST(Clear, ZeroAtSnapshotEquality) {
  std::mt19937_64 rng(7);
  for (auto direction : {agent::KlDirection::kReplayToCurrent, agent::KlDirection::kCurrentToReplay}) {
    PolicyBatch b = RandomBatch(rng, 4);
    nn::Tape tape;
    const HeadLogProbs lps = HeadsFrom(tape, b.params.Get("logits"));
    nn::RealArray replay({4, env::kActionLogits});
    std::size_t offset = 0;
    for (int h = 0; h < env::kHeadCount; ++h) {
      const auto k = static_cast<std::size_t>(env::kHeadSizes[h]);
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < k; ++j) replay.at(i, offset + j) = lps[h].value().at(i, j);
      offset += k;
    }
    const std::vector<double> values = {0.5, -1.0, 2.0, 0.0};
    nn::Var v = tape.Constant(nn::RealArray({4, 1}, values));
    const std::vector<SampleSource> src(4, SampleSource::kReplay);
    const std::vector<double> mask(4, 1.0);
    const ClearTerms t = ClearLosses(lps, replay, v, values, src, mask, direction);
    EXPECT_LT(std::abs(t.policy_cloning.value()[0]), 1e-12);
    EXPECT_EQ(t.value_cloning.value()[0], 0.0);
  }
}

TEST(Clear, DeltaAgainstUniformIsLogK) {
  nn::ParameterSet params;
  params.Add("logits", nn::RealArray({1, env::kActionLogits}));
  nn::Tape tape;
  const HeadLogProbs lps = HeadsFrom(tape, params.Get("logits"));
  auto flat = agent::ComposedDistribution::Uniform().Flat();
  // Move head becomes a point mass on value 3.
  for (int k = 0; k < env::kHeadSizes[env::kMove]; ++k)
    flat[static_cast<std::size_t>(k)] = k == 3 ? 0.0 : -std::numeric_limits<double>::infinity();
  const nn::RealArray replay({1, env::kActionLogits}, flat);
  const std::vector<double> values = {1.0};
  const ClearTerms t = ClearLosses(lps, replay, tape.Constant(nn::RealArray({1, 1}, 3.0)), values,
                                   std::vector<SampleSource>{SampleSource::kReplay},
                                   std::vector<double>{1.0});
  EXPECT_NEAR(t.policy_cloning.value()[0], std::log(5.0), 1e-12);
  EXPECT_EQ(t.value_cloning.value()[0], 4.0);
}

TEST(Clear, RejectsOnlineRowsAndEmptySelection) {
  nn::ParameterSet params;
  params.Add("logits", nn::RealArray({2, env::kActionLogits}));
  nn::Tape tape;
  const HeadLogProbs lps = HeadsFrom(tape, params.Get("logits"));
  const nn::RealArray replay({2, env::kActionLogits});
  const std::vector<double> values = {0.0, 0.0};
  nn::Var v = tape.Constant(nn::RealArray({2, 1}));
  const std::vector<SampleSource> mixed = {SampleSource::kOnline, SampleSource::kReplay};
  EXPECT_THROW(ClearLosses(lps, replay, v, values, mixed, std::vector<double>{1.0, 1.0}), UsageError);
  EXPECT_NO_THROW(ClearLosses(lps, replay, v, values, mixed, std::vector<double>{0.0, 1.0}));
  EXPECT_THROW(ClearLosses(lps, replay, v, values, mixed, std::vector<double>{0.0, 0.0}), UsageError);
}

TEST(TotalLoss, DefaultWeightsAndDisabledTerms) {
  const LossWeights w;
  EXPECT_EQ(w.policy_gradient, 1.0);
  EXPECT_EQ(w.value, 0.5);
  EXPECT_EQ(w.entropy, 0.01);
  EXPECT_EQ(w.policy_cloning, 0.01);
  EXPECT_EQ(w.value_cloning, 0.005);
  nn::Tape tape;
  LossComponents c;
  c.policy_gradient = tape.Constant(nn::RealArray::Scalar(2.0));
  c.value = tape.Constant(nn::RealArray::Scalar(4.0));
  c.policy_cloning = tape.Constant(nn::RealArray::Scalar(100.0));
  EXPECT_NEAR(TotalLoss(tape, c, w).value()[0], 2.0 + 2.0 + 1.0, 1e-15);
  EXPECT_EQ(TotalLoss(tape, LossComponents{}, w).value()[0], 0.0);
}

}  // namespace
}  // namespace chaincraft::rl
